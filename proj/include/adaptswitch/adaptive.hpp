#pragma once

// Fixed-delay adaptive controller: regressor assembly, certainty-equivalence
// control law and the normalized-gradient update with the beta0 guard.

#include "adaptswitch/plant.hpp"

#include <Eigen/Dense>

#include <deque>
#include <optional>

namespace adaptswitch {

/// Dimensions of a delay-d regressor: M = m1 + m2 + d entries.
struct RegressorLayout {
    int m1 = 0;
    int m2 = 0;
    int d = 1;

    [[nodiscard]] int dim() const noexcept { return m1 + m2 + d; }
    /// Position of u(k) (and of the beta0 estimate) in Phi / theta.
    [[nodiscard]] int nu_index() const noexcept { return dim() - 1; }
};

/// phi = (y(k)..y(k-m1+1), u(k-1)..u(k-m2-d+1)); Phi = (phi, u(k)).
struct RegressorPair {
    Eigen::VectorXd phi;
    Eigen::VectorXd Phi;
};

/// Builds the pair at sample k from arbitrary sample accessors. `u_at` is
/// queried for u(k-1)..u(k-m2-d+1); u(k) is passed explicitly.
template <typename YAt, typename UAt>
RegressorPair assemble_regressor(const RegressorLayout& layout, long k, YAt&& y_at, UAt&& u_at, double u_k) {
    const int M = layout.dim();
    RegressorPair r{Eigen::VectorXd(M - 1), Eigen::VectorXd(M)};
    int i = 0;
    for (int l = 0; l < layout.m1; ++l) {
        r.phi(i++) = y_at(k - l);
    }
    for (int l = 1; l <= layout.m2 + layout.d - 1; ++l) {
        r.phi(i++) = u_at(k - l);
    }
    r.Phi.head(M - 1) = r.phi;
    r.Phi(M - 1) = u_k;
    return r;
}

/// Regressor at the history's current sample. Throws std::out_of_range when
/// the history is too shallow for the layout.
[[nodiscard]] RegressorPair build_regressor(const SignalHistory& history, const RegressorLayout& layout,
                                            double u_k);

/// theta* for delay d: (alpha_0..alpha_{m1-1}, beta_1..beta_{m2+d-1}, beta_0).
[[nodiscard]] Eigen::VectorXd true_parameters(const PlantModel& model, int d);

/// Estimate theta_hat_d with beta0 estimate in the last slot and the guard
/// gain gamma used when the plain update would zero that slot.
class ParameterEstimate {
public:
    /// Throws std::invalid_argument unless 0 < gamma < 2 and gamma != 1.
    ParameterEstimate(Eigen::VectorXd theta, double gamma);
    /// All-zero estimate of the given dimension.
    static ParameterEstimate zeros(int dim, double gamma);

    [[nodiscard]] const Eigen::VectorXd& theta() const noexcept { return theta_; }
    [[nodiscard]] Eigen::VectorXd& theta() noexcept { return theta_; }
    [[nodiscard]] int dim() const noexcept { return static_cast<int>(theta_.size()); }
    [[nodiscard]] int nu_index() const noexcept { return dim() - 1; }
    [[nodiscard]] double beta0() const noexcept { return theta_(nu_index()); }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }

    static void check_gamma(double gamma);

private:
    Eigen::VectorXd theta_;
    double gamma_;
};

/// u(k) = (yref(k+d) - vartheta_hat' phi) / theta_hat_nu.
/// Throws std::logic_error when the beta0 estimate is zero.
[[nodiscard]] double control_law(const ParameterEstimate& est, const Eigen::VectorXd& phi, double yref_ahead);

/// control_law, with gamma standing in for a beta0 estimate that is still
/// exactly zero (a reset estimate before its first update).
[[nodiscard]] double guarded_control_law(const ParameterEstimate& est, const Eigen::VectorXd& phi,
                                         double yref_ahead);

struct UpdateResult {
    ParameterEstimate estimate;
    double eps = 0.0;   // y(k) - theta_hat(k-1)' Phi(k-d)
    double gain = 1.0;  // a(k): 1, or gamma when 1 would zero the beta0 slot
};

/// One normalized-gradient step
///   theta(k) = theta(k-1) + a(k) Phi(k-d) eps(k) / (1 + Phi(k-d)' Phi(k-d)).
[[nodiscard]] UpdateResult update(const ParameterEstimate& est, const Eigen::VectorXd& Phi_lagged, double y_k);

[[nodiscard]] inline double tracking_error(double y_k, double yref_k) noexcept { return y_k - yref_k; }

/// The baseline fixed-delay loop element. Each call to step() performs the
/// update at k (using the regressor stored d samples earlier) and returns u(k).
class AdaptiveController {
public:
    AdaptiveController(const RegressorLayout& layout, ParameterEstimate initial);

    [[nodiscard]] const RegressorLayout& layout() const noexcept { return layout_; }
    [[nodiscard]] const ParameterEstimate& estimate() const noexcept { return estimate_; }
    [[nodiscard]] double last_eps() const noexcept { return last_eps_; }
    [[nodiscard]] double last_gain() const noexcept { return last_gain_; }
    /// Regressor Phi(k) of the last step (contains the returned u(k)).
    [[nodiscard]] const RegressorPair& last_regressor() const noexcept { return last_regressor_; }
    /// Phi(k-d) consumed by the last update, if one happened.
    [[nodiscard]] const std::optional<Eigen::VectorXd>& last_lagged() const noexcept { return last_lagged_; }

    /// `yref_ahead` is yref(k+d). No update happens until d regressors exist.
    double step(const SignalHistory& history, double yref_ahead);

private:
    RegressorLayout layout_;
    ParameterEstimate estimate_;
    std::deque<Eigen::VectorXd> past_;  // Phi(k-d) .. Phi(k-1)
    RegressorPair last_regressor_;
    std::optional<Eigen::VectorXd> last_lagged_;
    double last_eps_ = 0.0;
    double last_gain_ = 1.0;
};

}  // namespace adaptswitch
