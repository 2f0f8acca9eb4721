#include "adaptswitch/supervisor.hpp"

#include "adaptswitch/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace adaptswitch {

std::string_view to_string(LoopMode m) noexcept {
    switch (m) {
        case LoopMode::TT: return "TT";
        case LoopMode::ET: return "ET";
        case LoopMode::Fixed: return "FIXED";
    }
    return "?";
}

DualEstimates apply_reset(DualEstimates duals, const SwitchEvent& event, int m2, int d2) {
    const bool even = event.p % 2 == 0;
    if (event.p < 0 || (even && event.to != Mode::TT) || (!even && event.to != Mode::ET)) {
        throw std::logic_error("apply_reset: switch direction does not match parity p=" + std::to_string(event.p));
    }
    if (even) {
        duals.theta1.theta().setZero();
    } else if (event.p == 1) {
        duals.theta2.theta().setZero();
        duals.hold_counter = 0;
    } else {
        if (!duals.theta2_memory) {
            throw std::logic_error("apply_reset: no stored ET estimate for p=" + std::to_string(event.p));
        }
        duals.theta2.theta() = *duals.theta2_memory;
        duals.hold_counter = m2 + d2 - 1;
    }
    return duals;
}

Eigen::VectorXd pad_to(const Eigen::VectorXd& v, Eigen::Index dim) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    out.head(v.size()) = v;
    return out;
}

std::pair<double, double> lyapunov(const DualEstimates& duals, const Eigen::VectorXd& theta_star_1,
                                   const Eigen::VectorXd& theta_star_2, Mode mode, double V_prev) {
    double V = 0.0;
    if (mode == Mode::TT) {
        const auto dim = theta_star_2.size();
        V = (pad_to(theta_star_1, dim) - pad_to(duals.theta1.theta(), dim)).squaredNorm();
    } else {
        V = (theta_star_2 - duals.theta2.theta()).squaredNorm();
    }
    return {V, V - V_prev};
}

EquivalentReference::EquivalentReference(const PlantModel& model)
    : a_(model.A().coeffs()),
      b_(model.B().coeffs()),
      d_past_(std::max<std::size_t>(a_.size(), 1)),
      dp_past_(std::max<std::size_t>(b_.size(), 1)) {
    if (!zeros_strictly_inside(model.B())) {
        throw ConfigError("equivalent reference: the inverse plant A/B is unstable (B has a zero outside the disk)");
    }
    for (std::size_t i = 0; i < d_past_.capacity(); ++i) d_past_.push(0.0);
    for (std::size_t i = 0; i < dp_past_.capacity(); ++i) dp_past_.push(0.0);
}

double EquivalentReference::step(double D_k) {
    double s = a_[0] * D_k;
    for (std::size_t i = 1; i < a_.size(); ++i) s += a_[i] * d_past_[i - 1];
    for (std::size_t j = 1; j < b_.size(); ++j) s -= b_[j] * dp_past_[j - 1];
    const double dp = s / b_[0];
    d_past_.push(D_k);
    dp_past_.push(dp);
    return dp;
}

std::vector<double> equivalent_reference(const PlantModel& model, const std::vector<double>& yref,
                                         const DisturbanceTrain& D) {
    EquivalentReference eq(model);
    std::vector<double> out(yref.size());
    for (std::size_t k = 0; k < yref.size(); ++k) out[k] = yref[k] + eq.step(D.at(static_cast<long>(k)));
    return out;
}

namespace {

PlantModel with_delay(PlantModel m, int d) {
    m.delay = d;
    return m;
}

}  // namespace

ReferenceModel::ReferenceModel(const PlantModel& model, int d)
    : model_(with_delay(model, d)),
      layout_{model.m1(), model.m2(), d},
      star_(true_parameters(model, d), 0.5),
      history_(SignalHistory::for_plant(model_, d)) {}

Eigen::VectorXd ReferenceModel::step(double yref_prime_ahead) {
    const auto r = build_regressor(history_, layout_, 0.0);
    const double u = control_law(star_, r.phi, yref_prime_ahead);
    step_difference(model_, history_, u, DisturbanceTrain{});
    return r.phi;
}

double signal_error(const Eigen::VectorXd& phi, const Eigen::VectorXd& phi_star) {
    if (phi.size() != phi_star.size()) {
        throw std::invalid_argument("signal_error: dimension mismatch");
    }
    return (phi - phi_star).norm();
}

Eigen::VectorXd default_initial_estimate(int dim) { return Eigen::VectorXd::Zero(dim); }

namespace {

ParameterEstimate initial(const std::optional<Eigen::VectorXd>& given, int dim, double gamma, const char* which) {
    if (given) {
        if (given->size() != dim) {
            throw ConfigError(std::string("supervisor: ") + which + " initial estimate has dimension " +
                              std::to_string(given->size()) + ", expected " + std::to_string(dim));
        }
        return ParameterEstimate(*given, gamma);
    }
    return ParameterEstimate(default_initial_estimate(dim), gamma);
}

}  // namespace

Supervisor::Supervisor(int app, SupervisorConfig config, std::vector<double> yref, DisturbanceTrain D)
    : app_(app),
      config_(std::move(config)),
      yref_(std::move(yref)),
      D_(std::move(D)),
      layout1_{config_.plant.m1(), config_.plant.m2(), 1},
      layout2_{config_.plant.m1(), config_.plant.m2(), config_.d2},
      star1_(true_parameters(config_.plant, 1)),
      star2_(true_parameters(config_.plant, config_.d2)),
      history_(SignalHistory::for_plant(config_.plant, config_.d2, config_.ic)),
      u_origin_(-static_cast<long>(config_.plant.m2() + 2 * config_.d2 + 1)),
      duals_{initial(config_.theta1_init, layout1_.dim(), config_.gamma1, "TT"),
             initial(config_.theta2_init, layout2_.dim(), config_.gamma2, "ET"), std::nullopt, 0},
      ref1_(config_.plant, 1),
      ref2_(config_.plant, config_.d2),
      gram1_(layout1_.dim(), config_.gram_window ? config_.gram_window : 9 * static_cast<std::size_t>(layout2_.dim())),
      gram2_(layout2_.dim(), config_.gram_window ? config_.gram_window : 9 * static_cast<std::size_t>(layout2_.dim())) {
    config_.plant.validate();
    if (config_.plant.delay != 1) {
        throw ConfigError("supervisor: the physical plant delay must be 1 (bus delay is added by the protocol)");
    }
    if (config_.d2 < 2) {
        throw ConfigError("supervisor: d2 must be >= 2");
    }
    if (!(config_.eth > 0.0)) {
        throw ConfigError("supervisor: eth must be > 0");
    }
    yref_prime_ = equivalent_reference(config_.plant, yref_, D_);
    for (long j = u_origin_; j < 0; ++j) {
        const auto i = static_cast<std::size_t>(-j - 1);
        schedule(j, i < config_.ic.u0.size() ? config_.ic.u0[i] : 0.0);
    }
    if (config_.policy == Policy::ETOnly) active_ = Mode::ET;
}

bool Supervisor::scheduled(long j) const {
    const long i = j - u_origin_;
    return i >= 0 && i < static_cast<long>(u_set_.size()) && u_set_[static_cast<std::size_t>(i)] != 0;
}

void Supervisor::schedule(long j, double value) {
    const long i = j - u_origin_;
    if (i < 0) throw std::logic_error("supervisor: scheduling before the record origin");
    if (i >= static_cast<long>(u_record_.size())) {
        u_record_.resize(static_cast<std::size_t>(i) + 1, 0.0);
        u_set_.resize(static_cast<std::size_t>(i) + 1, 0);
    }
    u_record_[static_cast<std::size_t>(i)] = value;
    u_set_[static_cast<std::size_t>(i)] = 1;
}

double Supervisor::applied(long j) const {
    if (!scheduled(j)) {
        throw std::out_of_range("supervisor: actuator value at sample " + std::to_string(j) + " is not scheduled");
    }
    return u_record_[static_cast<std::size_t>(j - u_origin_)];
}

// Delay-d regressor in terms of the virtual input v(j) = u~(j + d - 1).
RegressorPair Supervisor::regressor(int d, long k, double u_k) const {
    const RegressorLayout& layout = d == 1 ? layout1_ : layout2_;
    return assemble_regressor(
        layout, k, [&](long j) { return history_.y(j); }, [&](long j) { return applied(j + d - 1); }, u_k);
}

ParameterEstimate& Supervisor::estimate(Mode which) {
    if (which == Mode::TT) {
        ++(active_ == Mode::TT ? access_.theta1_in_tt : access_.theta1_in_et);
        return duals_.theta1;
    }
    ++(active_ == Mode::ET ? access_.theta2_in_et : access_.theta2_in_tt);
    return duals_.theta2;
}

void Supervisor::begin_step(Bus& bus) {
    const long k = history_.k();
    if (k + config_.d2 >= static_cast<long>(yref_.size())) {
        throw std::out_of_range("supervisor: reference does not cover the lookahead at k=" + std::to_string(k));
    }
    const double y = history_.y(k);
    const double e = tracking_error(y, yref_[static_cast<std::size_t>(k)]);

    pending_switch_.reset();
    Mode decision = active_;
    if (config_.policy == Policy::Switching) decision = select_mode(e, config_.eth);

    const Delivery delivery = bus.transmit(app_, active_, k);

    double u = 0.0;
    if (active_ == Mode::TT) {
        if (k >= 1) {
            const auto lagged = regressor(1, k - 1, applied(k - 1));
            auto& est = estimate(Mode::TT);
            auto r = update(est, lagged.Phi, y);
            est = std::move(r.estimate);
            last_eps_ = r.eps;
        }
        const auto now = regressor(1, k, 0.0);
        u = guarded_control_law(estimate(Mode::TT), now.phi, yref_[static_cast<std::size_t>(k + 1)]);
        schedule(k, u);
    } else {
        const bool leaving = decision == Mode::TT && config_.policy == Policy::Switching;
        if (leaving) {
            duals_.theta2_memory = estimate(Mode::ET).theta();
        }
        for (long j = k; j <= k + config_.d2 - 2; ++j) {
            if (!scheduled(j)) schedule(j, applied(j - 1));
        }
        if (k >= config_.d2) {
            const auto lagged = regressor(config_.d2, k - config_.d2, applied(k - 1));
            if (duals_.hold_counter > 0) {
                last_eps_ = y - estimate(Mode::ET).theta().dot(lagged.Phi);
                --duals_.hold_counter;
            } else {
                auto& est = estimate(Mode::ET);
                auto r = update(est, lagged.Phi, y);
                est = std::move(r.estimate);
                last_eps_ = r.eps;
            }
        } else if (duals_.hold_counter > 0) {
            --duals_.hold_counter;
        }
        if (leaving && (*duals_.theta2_memory)(layout2_.nu_index()) == 0.0) {
            duals_.theta2_memory = estimate(Mode::ET).theta();
        }
        const auto now = regressor(config_.d2, k, 0.0);
        u = guarded_control_law(estimate(Mode::ET), now.phi, yref_[static_cast<std::size_t>(k + config_.d2)]);
        schedule(k + config_.d2 - 1, u);
    }

    if (decision != active_) {
        const SwitchEvent& ev = log_.record(k, decision);
        duals_ = apply_reset(std::move(duals_), ev, config_.plant.m2(), config_.d2);
        pending_switch_ = decision;
    }

    row_ = TraceRow{};
    row_.app = app_;
    row_.k = k;
    row_.mode = active_ == Mode::TT ? LoopMode::TT : LoopMode::ET;
    row_.y = y;
    row_.yref = yref_[static_cast<std::size_t>(k)];
    row_.yref_prime = yref_prime_[static_cast<std::size_t>(k)];
    row_.e = e;
    row_.u = u;
    row_.delay = delivery.nominal_delay;
    row_.switch_code = switch_code(pending_switch_);
    row_.disturbance = D_.at(k);
}

TraceRow Supervisor::end_step() {
    const long k = history_.k();
    const Mode mode = active_;
    const int d = mode == Mode::TT ? 1 : config_.d2;

    // Regressors of both modes at k (signals only); the active one is checked.
    const auto phi_star_1 = ref1_.step(yref_prime_[static_cast<std::size_t>(k + 1)]);
    const auto phi_star_2 = ref2_.step(yref_prime_[static_cast<std::size_t>(k + config_.d2)]);
    const auto current = regressor(d, k, row_.u);
    row_.phi_err = signal_error(current.phi, mode == Mode::TT ? phi_star_1 : phi_star_2);

    step_difference(config_.plant, history_, applied(k), D_);

    GramWindow& gram = mode == Mode::TT ? gram1_ : gram2_;
    gram.push(current.Phi);
    row_.rank = subspace_basis(gram, config_.rank_tol).rank;

    const ParameterEstimate& est = mode == Mode::TT ? duals_.theta1 : duals_.theta2;
    row_.theta_norm = est.theta().norm();
    if (config_.theta_visible) {
        const auto [V, dV] = lyapunov(duals_, star1_, star2_, mode, V_prev_);
        row_.V = V;
        row_.dV = first_row_ ? 0.0 : dV;
        V_prev_ = V;
        const Eigen::VectorXd err = (mode == Mode::TT ? star1_ : star2_) - est.theta();
        row_.orth_residual = orthogonality_residual(err, gram.samples());
    } else {
        row_.V = row_.dV = row_.orth_residual = std::numeric_limits<double>::quiet_NaN();
    }
    first_row_ = false;

    if (pending_switch_) active_ = *pending_switch_;
    return row_;
}

}  // namespace adaptswitch
