#pragma once

// Switching adaptive controller for one application: TT controller (d = 1)
// and ET controller (d = d2) selected by the bus mode, parameter resets at
// the switching instants, and the runtime monitors (Lyapunov value,
// equivalent reference, reference-model regressor, excitation).

#include "adaptswitch/adaptive.hpp"
#include "adaptswitch/bus.hpp"
#include "adaptswitch/excitation.hpp"
#include "adaptswitch/plant.hpp"

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

namespace adaptswitch {

enum class Policy { Switching, TTOnly, ETOnly };

enum class LoopMode { TT, ET, Fixed };

[[nodiscard]] std::string_view to_string(LoopMode m) noexcept;

/// 0 = no switch, 1 = TT->ET, 2 = ET->TT.
[[nodiscard]] inline int switch_code(std::optional<Mode> to) noexcept {
    return !to ? 0 : (*to == Mode::ET ? 1 : 2);
}

struct TraceRow {
    int app = 0;
    long k = 0;
    LoopMode mode = LoopMode::TT;
    double y = 0.0;
    double yref = 0.0;
    double yref_prime = 0.0;
    double e = 0.0;
    double u = 0.0;
    int delay = 1;
    double V = 0.0;
    double dV = 0.0;
    double phi_err = 0.0;
    int rank = 0;
    double orth_residual = 0.0;
    int switch_code = 0;
    double disturbance = 0.0;
    double theta_norm = 0.0;

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct DualEstimates {
    ParameterEstimate theta1;
    ParameterEstimate theta2;
    std::optional<Eigen::VectorXd> theta2_memory;
    int hold_counter = 0;
};

/// Estimate selections at a switching instant: even p zeroes theta1, p = 1
/// zeroes theta2, odd p >= 3 restores theta2 from memory and starts a hold of
/// m2 + d2 - 1 ET samples. Throws std::logic_error when the direction does not
/// match the parity or the memory is missing.
[[nodiscard]] DualEstimates apply_reset(DualEstimates duals, const SwitchEvent& event, int m2, int d2);

/// theta1 zero-padded to the dimension of theta2.
[[nodiscard]] Eigen::VectorXd pad_to(const Eigen::VectorXd& v, Eigen::Index dim);

/// V = |theta_a* - theta_a_hat|^2 for the given mode (TT pads theta1) and
/// dV = V - V_prev.
[[nodiscard]] std::pair<double, double> lyapunov(const DualEstimates& duals, const Eigen::VectorXd& theta_star_1,
                                                 const Eigen::VectorXd& theta_star_2, Mode mode, double V_prev);

/// D'(k) = (A/B)(q^-1) D(k), realised as B D' = A D.
class EquivalentReference {
public:
    /// Throws ConfigError when B has a zero on or outside the unit circle.
    explicit EquivalentReference(const PlantModel& model);

    /// Consumes D(k) and returns D'(k).
    double step(double D_k);

private:
    std::vector<double> a_;  // 1, a1..am1
    std::vector<double> b_;
    RingBuffer<double> d_past_;
    RingBuffer<double> dp_past_;
};

/// y'ref over [0, len): yref(k) + D'(k).
[[nodiscard]] std::vector<double> equivalent_reference(const PlantModel& model, const std::vector<double>& yref,
                                                       const DisturbanceTrain& D);

/// Ideal closed loop: the true plant with delay d under the controller
/// u = (y'ref(k+d) - vartheta*' phi*) / beta0. Its regressor is phi*.
class ReferenceModel {
public:
    ReferenceModel(const PlantModel& model, int d);

    [[nodiscard]] int delay() const noexcept { return layout_.d; }

    /// Returns phi*(k) and advances the loop using y'ref(k+d).
    Eigen::VectorXd step(double yref_prime_ahead);

private:
    PlantModel model_;
    RegressorLayout layout_;
    ParameterEstimate star_;
    SignalHistory history_;
};

/// |phi - phi*|. Throws std::invalid_argument on a dimension mismatch.
[[nodiscard]] double signal_error(const Eigen::VectorXd& phi, const Eigen::VectorXd& phi_star);

struct SupervisorConfig {
    PlantModel plant;               // physical delay must be 1
    InitialConditions ic;
    double eth = 0.05;
    int d2 = 2;
    double gamma1 = 0.5;
    double gamma2 = 0.5;
    std::optional<Eigen::VectorXd> theta1_init;  // default: zero vector
    std::optional<Eigen::VectorXd> theta2_init;
    Policy policy = Policy::Switching;
    bool theta_visible = true;      // enables V, dV and the orthogonality residual
    std::size_t gram_window = 0;    // 0 = 9 * M2
    double rank_tol = kDefaultRankTol;
};

/// Default initial estimate: the zero vector.
[[nodiscard]] Eigen::VectorXd default_initial_estimate(int dim);

/// Controller accesses to each estimate, split by the active mode. Resets
/// are not counted.
struct AccessCounters {
    long theta1_in_tt = 0;
    long theta1_in_et = 0;
    long theta2_in_tt = 0;
    long theta2_in_et = 0;
};

class Supervisor {
public:
    /// `yref` must cover samples 0 .. horizon + d2; D is the plant disturbance.
    Supervisor(int app, SupervisorConfig config, std::vector<double> yref, DisturbanceTrain D);

    [[nodiscard]] int app() const noexcept { return app_; }
    [[nodiscard]] long k() const noexcept { return history_.k(); }
    [[nodiscard]] Mode active_mode() const noexcept { return active_; }
    [[nodiscard]] const DualEstimates& duals() const noexcept { return duals_; }
    [[nodiscard]] const SwitchLog& switch_log() const noexcept { return log_; }
    [[nodiscard]] const AccessCounters& access() const noexcept { return access_; }
    [[nodiscard]] const SupervisorConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Eigen::VectorXd& theta_star_1() const noexcept { return star1_; }
    [[nodiscard]] const Eigen::VectorXd& theta_star_2() const noexcept { return star2_; }
    [[nodiscard]] const GramWindow& gram(Mode m) const noexcept { return m == Mode::TT ? gram1_ : gram2_; }
    /// eps of the last update (logged even during a hold).
    [[nodiscard]] double last_eps() const noexcept { return last_eps_; }
    /// Applied actuator value u~(j), scheduled values included.
    [[nodiscard]] double applied(long j) const;

    /// Sense, select mode, transmit, update and compute the control input,
    /// then apply resets. Call once per sample before the bus advances.
    void begin_step(Bus& bus);
    /// Advance the plant and evaluate the monitors; returns the sample's row.
    TraceRow end_step();

private:
    RegressorPair regressor(int d, long k, double u_k) const;
    ParameterEstimate& estimate(Mode which);
    void schedule(long j, double value);
    bool scheduled(long j) const;

    int app_;
    SupervisorConfig config_;
    std::vector<double> yref_;
    std::vector<double> yref_prime_;
    DisturbanceTrain D_;
    RegressorLayout layout1_;
    RegressorLayout layout2_;
    Eigen::VectorXd star1_;
    Eigen::VectorXd star2_;

    SignalHistory history_;
    long u_origin_;                 // sample index of u_record_[0]
    std::vector<double> u_record_;
    std::vector<char> u_set_;

    DualEstimates duals_;
    SwitchLog log_;
    Mode active_ = Mode::TT;
    AccessCounters access_;
    double last_eps_ = 0.0;

    ReferenceModel ref1_;
    ReferenceModel ref2_;
    GramWindow gram1_;
    GramWindow gram2_;
    double V_prev_ = 0.0;
    bool first_row_ = true;

    TraceRow row_;
    std::optional<Mode> pending_switch_;
};

}  // namespace adaptswitch
