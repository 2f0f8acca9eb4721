#include "adaptswitch/adaptive.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptswitch {

namespace {

// beta0 candidates below this magnitude count as zero.
constexpr double kZeroDivisor = 1e-300;

}  // namespace

RegressorPair build_regressor(const SignalHistory& history, const RegressorLayout& layout, double u_k) {
    return assemble_regressor(
        layout, history.k(), [&](long j) { return history.y(j); }, [&](long j) { return history.u(j); }, u_k);
}

Eigen::VectorXd true_parameters(const PlantModel& model, int d) {
    const auto pc = predictor_coeffs(model.A(), model.B(), d);
    const RegressorLayout layout{model.m1(), model.m2(), d};
    Eigen::VectorXd theta(layout.dim());
    int i = 0;
    for (int l = 0; l < layout.m1; ++l) {
        theta(i++) = pc.alpha[static_cast<std::size_t>(l)];
    }
    for (int l = 1; l <= layout.m2 + d - 1; ++l) {
        theta(i++) = pc.beta[static_cast<std::size_t>(l)];
    }
    theta(i) = pc.beta[0];
    return theta;
}

void ParameterEstimate::check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 2.0) || gamma == 1.0) {
        throw std::invalid_argument("guard gain gamma must satisfy 0 < gamma < 2, gamma != 1 (got " +
                                    std::to_string(gamma) + ")");
    }
}

ParameterEstimate::ParameterEstimate(Eigen::VectorXd theta, double gamma)
    : theta_(std::move(theta)), gamma_(gamma) {
    if (theta_.size() < 1) {
        throw std::invalid_argument("ParameterEstimate: empty parameter vector");
    }
    check_gamma(gamma_);
}

ParameterEstimate ParameterEstimate::zeros(int dim, double gamma) {
    return ParameterEstimate(Eigen::VectorXd::Zero(dim), gamma);
}

double control_law(const ParameterEstimate& est, const Eigen::VectorXd& phi, double yref_ahead) {
    const double b0 = est.beta0();
    if (b0 == 0.0) {
        throw std::logic_error("control_law: beta0 estimate is zero (update guard invariant violated)");
    }
    const int n = est.nu_index();
    if (phi.size() != n) {
        throw std::invalid_argument("control_law: phi has dimension " + std::to_string(phi.size()) +
                                    ", expected " + std::to_string(n));
    }
    return (yref_ahead - est.theta().head(n).dot(phi)) / b0;
}

double guarded_control_law(const ParameterEstimate& est, const Eigen::VectorXd& phi, double yref_ahead) {
    if (est.beta0() != 0.0) return control_law(est, phi, yref_ahead);
    ParameterEstimate substitute = est;
    substitute.theta()(est.nu_index()) = est.gamma();
    return control_law(substitute, phi, yref_ahead);
}

UpdateResult update(const ParameterEstimate& est, const Eigen::VectorXd& Phi_lagged, double y_k) {
    if (Phi_lagged.size() != est.dim()) {
        throw std::invalid_argument("update: regressor dimension mismatch");
    }
    const double eps = y_k - est.theta().dot(Phi_lagged);
    const double norm = 1.0 + Phi_lagged.squaredNorm();
    const int nu = est.nu_index();

    double gain = 1.0;
    const double candidate = est.theta()(nu) + Phi_lagged(nu) * eps / norm;
    if (std::abs(candidate) < kZeroDivisor) {
        gain = est.gamma();
    }
    UpdateResult r{est, eps, gain};
    if (eps != 0.0) {
        r.estimate.theta() += (gain * eps / norm) * Phi_lagged;
    }
    return r;
}

AdaptiveController::AdaptiveController(const RegressorLayout& layout, ParameterEstimate initial)
    : layout_(layout), estimate_(std::move(initial)) {
    if (estimate_.dim() != layout_.dim()) {
        throw std::invalid_argument("AdaptiveController: estimate dimension does not match layout");
    }
}

double AdaptiveController::step(const SignalHistory& history, double yref_ahead) {
    last_lagged_.reset();
    if (static_cast<int>(past_.size()) == layout_.d) {
        auto r = update(estimate_, past_.front(), history.y(history.k()));
        estimate_ = std::move(r.estimate);
        last_eps_ = r.eps;
        last_gain_ = r.gain;
        last_lagged_ = std::move(past_.front());
        past_.pop_front();
    }
    last_regressor_ = build_regressor(history, layout_, 0.0);
    const double u = guarded_control_law(estimate_, last_regressor_.phi, yref_ahead);
    last_regressor_.Phi(layout_.nu_index()) = u;
    past_.push_back(last_regressor_.Phi);
    return u;
}

}  // namespace adaptswitch
