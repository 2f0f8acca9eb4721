#include "adaptswitch/scenario.hpp"

#include "adaptswitch/errors.hpp"
#include "adaptswitch/excitation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace adaptswitch {

using nlohmann::json;

std::optional<int> ReferenceSpec::nominal_sr_order() const {
    if (sr_order) return sr_order;
    switch (kind) {
        case Kind::Constant:
            return value == 0.0 ? 0 : 1;
        case Kind::Sinusoid: {
            std::set<double> freqs;
            for (const auto& t : terms) {
                if (t.amplitude != 0.0) freqs.insert(std::abs(t.frequency));
            }
            return 2 * static_cast<int>(freqs.size()) + (value != 0.0 ? 1 : 0);
        }
        default:
            return std::nullopt;
    }
}

std::vector<double> generate_reference(const ReferenceSpec& spec, std::size_t len) {
    std::vector<double> out(len, 0.0);
    switch (spec.kind) {
        case ReferenceSpec::Kind::Constant:
            std::fill(out.begin(), out.end(), spec.value);
            break;
        case ReferenceSpec::Kind::Sinusoid:
            for (std::size_t k = 0; k < len; ++k) {
                double v = spec.value;
                for (const auto& t : spec.terms) {
                    v += t.amplitude * std::sin(t.frequency * static_cast<double>(k) + t.phase);
                }
                out[k] = v;
            }
            break;
        case ReferenceSpec::Kind::Square:
            for (std::size_t k = 0; k < len; ++k) {
                const bool high = (static_cast<long>(k) % spec.period) < spec.period / 2;
                out[k] = spec.value + (high ? spec.amplitude : -spec.amplitude);
            }
            break;
        case ReferenceSpec::Kind::File: {
            std::ifstream in(spec.path);
            if (!in) throw ConfigError("reference: cannot open '" + spec.path.string() + "'");
            std::size_t k = 0;
            std::string line;
            while (k < len && std::getline(in, line)) {
                if (line.empty()) continue;
                try {
                    out[k++] = std::stod(line);
                } catch (const std::exception&) {
                    throw ConfigError("reference: '" + spec.path.string() + "' line " + std::to_string(k + 1) +
                                      " is not a number");
                }
            }
            if (k < len) {
                throw ConfigError("reference: '" + spec.path.string() + "' has " + std::to_string(k) +
                                  " samples, the run needs " + std::to_string(len));
            }
            break;
        }
    }
    return out;
}

DisturbanceTrain make_disturbance(const DisturbanceSpec& spec, long horizon, std::uint64_t seed) {
    try {
        switch (spec.kind) {
            case DisturbanceSpec::Kind::None:
                return {};
            case DisturbanceSpec::Kind::Impulses:
                return make_impulse_train(spec.tdw, spec.times, spec.amplitudes);
            case DisturbanceSpec::Kind::Random:
                return make_random_impulse_train(spec.tdw, horizon, spec.amplitudes, seed);
        }
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(std::string("disturbance: ") + ex.what());
    }
    return {};
}

BusConfig ScenarioConfig::bus_config() const {
    BusConfig bc;
    for (const auto& a : apps) bc.apps.push_back(a.bus);
    bc.minislots_per_cycle = minislots_per_cycle;
    bc.d2 = d2;
    return bc;
}

void ScenarioConfig::validate() const {
    if (apps.empty()) throw ConfigError("plants: at least one plant is required");
    if (horizon < 0) throw ConfigError("horizon: must be >= 0");
    if (fixed_delay < 1) throw ConfigError("fixed_delay: must be >= 1");
    for (double g : {gamma1, gamma2}) {
        try {
            ParameterEstimate::check_gamma(g);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("gammas: ") + ex.what());
        }
    }
    for (std::size_t i = 0; i < apps.size(); ++i) {
        try {
            apps[i].plant.validate();
        } catch (const ConfigError& ex) {
            throw ConfigError("plants[" + std::to_string(i) + "]: " + ex.what());
        }
        if (apps[i].reference.kind == ReferenceSpec::Kind::Square && apps[i].reference.period < 2) {
            throw ConfigError("plants[" + std::to_string(i) + "].reference.period: must be >= 2");
        }
    }
    bus_config().validate();
}

namespace {

// ---- JSON reading ----

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            fail(path + "." + key, "unknown field");
        }
    }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& path, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(path + "." + key, "has the wrong type");
    }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) fail(path + "." + key, "is required");
    return get<T>(obj, key, path, T{});
}

ReferenceSpec parse_reference(const json& j, const std::string& path, const std::filesystem::path& base) {
    check_keys(j, path, {"type", "value", "offset", "terms", "amplitude", "period", "path", "sr_order"});
    ReferenceSpec r;
    const auto type = require<std::string>(j, "type", path);
    if (j.contains("sr_order")) r.sr_order = get<int>(j, "sr_order", path, 0);
    if (type == "constant") {
        r.kind = ReferenceSpec::Kind::Constant;
        r.value = require<double>(j, "value", path);
    } else if (type == "sinusoid") {
        r.kind = ReferenceSpec::Kind::Sinusoid;
        r.value = get<double>(j, "offset", path, 0.0);
        if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty()) {
            fail(path + ".terms", "needs at least one {amplitude, frequency, phase} entry");
        }
        for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
            const auto& t = j.at("terms")[i];
            const auto tp = path + ".terms[" + std::to_string(i) + "]";
            check_keys(t, tp, {"amplitude", "frequency", "phase"});
            r.terms.push_back({get<double>(t, "amplitude", tp, 1.0), require<double>(t, "frequency", tp),
                               get<double>(t, "phase", tp, 0.0)});
        }
    } else if (type == "square") {
        r.kind = ReferenceSpec::Kind::Square;
        r.value = get<double>(j, "offset", path, 0.0);
        r.amplitude = get<double>(j, "amplitude", path, 1.0);
        r.period = require<long>(j, "period", path);
    } else if (type == "file") {
        r.kind = ReferenceSpec::Kind::File;
        r.path = require<std::string>(j, "path", path);
        if (r.path.is_relative()) r.path = base / r.path;
    } else {
        fail(path + ".type", "must be constant, sinusoid, square or file (got '" + type + "')");
    }
    return r;
}

DisturbanceSpec parse_disturbance(const json& j, const std::string& path) {
    check_keys(j, path, {"type", "tdw", "times", "amplitudes", "amplitude"});
    DisturbanceSpec d;
    const auto type = require<std::string>(j, "type", path);
    d.tdw = get<long>(j, "tdw", path, 500);
    if (j.contains("amplitude")) d.amplitudes = {get<double>(j, "amplitude", path, 1.0)};
    if (j.contains("amplitudes")) d.amplitudes = get<std::vector<double>>(j, "amplitudes", path, {});
    if (d.amplitudes.empty()) fail(path + ".amplitudes", "must not be empty");
    if (type == "none") {
        d.kind = DisturbanceSpec::Kind::None;
    } else if (type == "impulses") {
        d.kind = DisturbanceSpec::Kind::Impulses;
        d.times = require<std::vector<long>>(j, "times", path);
    } else if (type == "random") {
        d.kind = DisturbanceSpec::Kind::Random;
    } else {
        fail(path + ".type", "must be none, impulses or random (got '" + type + "')");
    }
    if (d.kind != DisturbanceSpec::Kind::None && d.tdw < 1) fail(path + ".tdw", "must be >= 1");
    return d;
}

std::optional<Eigen::VectorXd> parse_vector(const json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) return std::nullopt;
    const auto v = get<std::vector<double>>(j, key, path, {});
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

MonitorSpec parse_monitors(const json& j, const std::string& path) {
    check_keys(j, path, {"bound", "min_dwell", "tracking", "rank", "orthogonality", "switching", "bus", "reference_sr"});
    MonitorSpec m;
    m.bound = get<double>(j, "bound", path, m.bound);
    if (j.contains("min_dwell")) m.min_dwell = get<long>(j, "min_dwell", path, 0);
    if (j.contains("tracking")) {
        const auto& t = j.at("tracking");
        const auto tp = path + ".tracking";
        check_keys(t, tp, {"tol", "from"});
        m.tracking = MonitorSpec::Tracking{get<double>(t, "tol", tp, 1e-3), get<long>(t, "from", tp, 0)};
    }
    if (j.contains("rank")) {
        const auto& t = j.at("rank");
        const auto tp = path + ".rank";
        check_keys(t, tp, {"expected", "final_window"});
        m.rank = MonitorSpec::Rank{require<int>(t, "expected", tp), get<long>(t, "final_window", tp, 500)};
    }
    if (j.contains("orthogonality")) {
        const auto& t = j.at("orthogonality");
        const auto tp = path + ".orthogonality";
        check_keys(t, tp, {"tol", "final_window"});
        m.orthogonality =
            MonitorSpec::Orthogonality{get<double>(t, "tol", tp, 1e-3), get<long>(t, "final_window", tp, 500)};
    }
    if (j.contains("switching")) {
        const auto& t = j.at("switching");
        const auto tp = path + ".switching";
        check_keys(t, tp, {"dv_tol", "quiet_from"});
        m.switching = MonitorSpec::Switching{get<double>(t, "dv_tol", tp, 1e-9), get<long>(t, "quiet_from", tp, 1000)};
    }
    m.bus = get<bool>(j, "bus", path, true);
    m.reference_sr = get<bool>(j, "reference_sr", path, true);
    return m;
}

std::string line_context(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1, col = 1, start = 0;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
            start = i + 1;
        } else {
            ++col;
        }
    }
    const auto end = text.find('\n', start);
    const auto src = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    return "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + src;
}

// ---- run loop ----

class Loop {
public:
    virtual ~Loop() = default;
    virtual void begin(Bus& bus) = 0;
    virtual TraceRow end() = 0;
    [[nodiscard]] virtual std::vector<SwitchEvent> switches() const = 0;
};

class SwitchingLoop final : public Loop {
public:
    SwitchingLoop(int app, SupervisorConfig cfg, std::vector<double> yref, DisturbanceTrain D)
        : sup_(app, std::move(cfg), std::move(yref), std::move(D)) {}

    void begin(Bus& bus) override { sup_.begin_step(bus); }
    TraceRow end() override { return sup_.end_step(); }
    [[nodiscard]] std::vector<SwitchEvent> switches() const override { return sup_.switch_log().events(); }

private:
    Supervisor sup_;
};

class FixedLoop final : public Loop {
public:
    FixedLoop(int app, const AppSpec& spec, const ScenarioConfig& cfg, std::vector<double> yref, DisturbanceTrain D)
        : app_(app),
          model_(spec.plant),
          d_(cfg.fixed_delay),
          yref_(std::move(yref)),
          D_(std::move(D)),
          history_(SignalHistory::for_plant(with_delay(spec.plant, cfg.fixed_delay), cfg.fixed_delay, spec.ic)),
          ctrl_(RegressorLayout{model_.m1(), model_.m2(), d_},
                ParameterEstimate(spec.theta1_init ? *spec.theta1_init
                                                   : Eigen::VectorXd::Zero(model_.m1() + model_.m2() + d_),
                                  d_ == 1 ? cfg.gamma1 : cfg.gamma2)),
          star_(true_parameters(model_, d_)),
          ref_(model_, d_),
          gram_(ctrl_.layout().dim(),
                cfg.gram_window ? cfg.gram_window : 9 * static_cast<std::size_t>(ctrl_.layout().dim())),
          visible_(spec.theta_visible),
          rank_tol_(cfg.rank_tol) {
        model_.delay = d_;
        yref_prime_ = equivalent_reference(model_, yref_, D_);
    }

    void begin(Bus& bus) override {
        const long k = history_.k();
        row_ = TraceRow{};
        row_.app = app_;
        row_.k = k;
        row_.mode = LoopMode::Fixed;
        row_.y = history_.y(k);
        row_.yref = yref_[static_cast<std::size_t>(k)];
        row_.yref_prime = yref_prime_[static_cast<std::size_t>(k)];
        row_.e = tracking_error(row_.y, row_.yref);
        row_.delay = d_;
        row_.disturbance = D_.at(k);
        (void)bus.transmit(app_, Mode::TT, k);
        u_ = ctrl_.step(history_, yref_[static_cast<std::size_t>(k + d_)]);
        row_.u = u_;
    }

    TraceRow end() override {
        const long k = history_.k();
        const auto phi_star = ref_.step(yref_prime_[static_cast<std::size_t>(k + d_)]);
        row_.phi_err = signal_error(ctrl_.last_regressor().phi, phi_star);
        step_difference(model_, history_, u_, D_);
        gram_.push(ctrl_.last_regressor().Phi);
        row_.rank = subspace_basis(gram_, rank_tol_).rank;
        row_.theta_norm = ctrl_.estimate().theta().norm();
        if (visible_) {
            const Eigen::VectorXd err = star_ - ctrl_.estimate().theta();
            const double V = err.squaredNorm();
            row_.V = V;
            row_.dV = first_ ? 0.0 : V - V_prev_;
            V_prev_ = V;
            row_.orth_residual = orthogonality_residual(err, gram_.samples());
        } else {
            row_.V = row_.dV = row_.orth_residual = std::numeric_limits<double>::quiet_NaN();
        }
        first_ = false;
        return row_;
    }

    [[nodiscard]] std::vector<SwitchEvent> switches() const override { return {}; }

private:
    static PlantModel with_delay(PlantModel m, int d) {
        m.delay = d;
        return m;
    }

    int app_;
    PlantModel model_;
    int d_;
    std::vector<double> yref_;
    std::vector<double> yref_prime_;
    DisturbanceTrain D_;
    SignalHistory history_;
    AdaptiveController ctrl_;
    Eigen::VectorXd star_;
    ReferenceModel ref_;
    GramWindow gram_;
    bool visible_;
    double rank_tol_;
    double u_ = 0.0;
    double V_prev_ = 0.0;
    bool first_ = true;
    TraceRow row_;
};

std::optional<int> measured_sr_order(const std::vector<double>& yref, std::optional<int> declared) {
    if (!declared) return std::nullopt;
    constexpr std::size_t kWindow = 200;
    constexpr std::size_t kSpan = 1000;
    const int m_max = *declared + 1;
    const std::size_t len = std::min(yref.size(), kSpan);
    if (len < kWindow + static_cast<std::size_t>(m_max)) return std::nullopt;
    return sr_order(std::vector<double>(yref.begin(), yref.begin() + static_cast<long>(len)), m_max, kWindow);
}

}  // namespace

ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw ConfigError("config: JSON syntax error at " + line_context(text, ex.byte) + " (" + ex.what() + ")");
    }
    const std::string root = "config";
    check_keys(j, root,
               {"name", "horizon", "seed", "controller", "fixed_delay", "policy", "gammas", "gram_window", "rank_tol",
                "bus", "reference", "disturbance", "plants", "monitors"});
    ScenarioConfig c;
    c.name = get<std::string>(j, "name", root, c.name);
    c.horizon = get<long>(j, "horizon", root, c.horizon);
    c.seed = get<std::uint64_t>(j, "seed", root, c.seed);
    const auto controller = get<std::string>(j, "controller", root, "switching");
    if (controller == "switching") {
        c.controller = ControllerKind::Switching;
    } else if (controller == "fixed") {
        c.controller = ControllerKind::Fixed;
    } else {
        fail("config.controller", "must be switching or fixed (got '" + controller + "')");
    }
    c.fixed_delay = get<int>(j, "fixed_delay", root, c.fixed_delay);
    const auto policy = get<std::string>(j, "policy", root, "switching");
    if (policy == "switching") {
        c.policy = Policy::Switching;
    } else if (policy == "tt_only") {
        c.policy = Policy::TTOnly;
    } else if (policy == "et_only") {
        c.policy = Policy::ETOnly;
    } else {
        fail("config.policy", "must be switching, tt_only or et_only (got '" + policy + "')");
    }
    if (j.contains("gammas")) {
        const auto g = get<std::vector<double>>(j, "gammas", root, {});
        if (g.size() != 2) fail("config.gammas", "expected [gamma1, gamma2]");
        c.gamma1 = g[0];
        c.gamma2 = g[1];
    }
    c.gram_window = get<std::size_t>(j, "gram_window", root, c.gram_window);
    c.rank_tol = get<double>(j, "rank_tol", root, c.rank_tol);

    double default_eth = 0.05;
    if (j.contains("bus")) {
        const auto& b = j.at("bus");
        check_keys(b, "config.bus", {"d2", "minislots_per_cycle", "eth"});
        c.d2 = get<int>(b, "d2", "config.bus", c.d2);
        c.minislots_per_cycle = get<int>(b, "minislots_per_cycle", "config.bus", c.minislots_per_cycle);
        default_eth = get<double>(b, "eth", "config.bus", default_eth);
    }
    ReferenceSpec default_ref;
    if (j.contains("reference")) default_ref = parse_reference(j.at("reference"), "config.reference", base_dir);
    DisturbanceSpec default_dist;
    if (j.contains("disturbance")) default_dist = parse_disturbance(j.at("disturbance"), "config.disturbance");

    if (!j.contains("plants") || !j.at("plants").is_array()) fail("config.plants", "a list of plants is required");
    const auto& plants = j.at("plants");
    for (std::size_t i = 0; i < plants.size(); ++i) {
        const auto& p = plants[i];
        const auto path = "config.plants[" + std::to_string(i) + "]";
        check_keys(p, path,
                   {"a", "b", "y0", "u0", "theta_visible", "eth", "static_slot", "dyn_priority", "message_length",
                    "reference", "disturbance", "theta1_init", "theta2_init", "h"});
        AppSpec a;
        a.plant.a = get<std::vector<double>>(p, "a", path, {});
        a.plant.b = require<std::vector<double>>(p, "b", path);
        a.plant.h = get<double>(p, "h", path, 1.0);
        a.plant.delay = c.controller == ControllerKind::Fixed ? c.fixed_delay : 1;
        a.ic.y0 = get<std::vector<double>>(p, "y0", path, {});
        a.ic.u0 = get<std::vector<double>>(p, "u0", path, {});
        a.theta_visible = get<bool>(p, "theta_visible", path, true);
        a.bus.eth = get<double>(p, "eth", path, default_eth);
        a.bus.static_slot = get<int>(p, "static_slot", path, static_cast<int>(i));
        a.bus.dyn_priority = get<int>(p, "dyn_priority", path, static_cast<int>(i));
        a.bus.message_length = get<int>(p, "message_length", path, 1);
        a.reference = p.contains("reference") ? parse_reference(p.at("reference"), path + ".reference", base_dir)
                                              : default_ref;
        a.disturbance =
            p.contains("disturbance") ? parse_disturbance(p.at("disturbance"), path + ".disturbance") : default_dist;
        a.theta1_init = parse_vector(p, "theta1_init", path);
        a.theta2_init = parse_vector(p, "theta2_init", path);
        c.apps.push_back(std::move(a));
    }
    if (j.contains("monitors")) c.monitors = parse_monitors(j.at("monitors"), "config.monitors");
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    } catch (const ConfigError& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
}

Trace run_scenario(const ScenarioConfig& config) {
    config.validate();
    Trace trace;
    trace.scenario = config.name;
    trace.horizon = config.horizon;
    trace.d2 = config.d2;

    const int n = static_cast<int>(config.apps.size());
    const int lookahead = std::max(config.d2, config.fixed_delay);
    const auto len = static_cast<std::size_t>(config.horizon + lookahead + 1);
    std::mt19937_64 rng(config.seed);

    std::vector<std::unique_ptr<Loop>> loops;
    for (int i = 0; i < n; ++i) {
        const AppSpec& spec = config.apps[static_cast<std::size_t>(i)];
        auto yref = generate_reference(spec.reference, len);
        auto D = make_disturbance(spec.disturbance, config.horizon, rng());

        AppTrace at;
        at.app = i;
        at.m2 = spec.plant.m2();
        at.eth = spec.bus.eth;
        for (long t : D.times()) {
            if (t < config.horizon) at.impulses.push_back(t);
        }
        at.reference_sr_declared = spec.reference.nominal_sr_order();
        at.reference_sr_measured = measured_sr_order(yref, at.reference_sr_declared);
        trace.apps.push_back(std::move(at));

        if (config.controller == ControllerKind::Switching) {
            SupervisorConfig sc;
            sc.plant = spec.plant;
            sc.plant.delay = 1;
            sc.ic = spec.ic;
            sc.eth = spec.bus.eth;
            sc.d2 = config.d2;
            sc.gamma1 = config.gamma1;
            sc.gamma2 = config.gamma2;
            sc.theta1_init = spec.theta1_init;
            sc.theta2_init = spec.theta2_init;
            sc.policy = config.policy;
            sc.theta_visible = spec.theta_visible;
            sc.gram_window = config.gram_window;
            sc.rank_tol = config.rank_tol;
            loops.push_back(std::make_unique<SwitchingLoop>(i, std::move(sc), std::move(yref), std::move(D)));
        } else {
            loops.push_back(std::make_unique<FixedLoop>(i, spec, config, std::move(yref), std::move(D)));
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return config.apps[static_cast<std::size_t>(a)].bus.dyn_priority <
               config.apps[static_cast<std::size_t>(b)].bus.dyn_priority;
    });

    Bus bus(config.bus_config());
    try {
        for (long k = 0; k < config.horizon; ++k) {
            for (int i : order) loops[static_cast<std::size_t>(i)]->begin(bus);
            (void)bus.advance_cycle(k);
            for (int i = 0; i < n; ++i) {
                trace.apps[static_cast<std::size_t>(i)].rows.push_back(loops[static_cast<std::size_t>(i)]->end());
            }
        }
    } catch (const BusInfeasibleError& ex) {
        trace.error = std::string("bus infeasible (application ") + std::to_string(ex.app()) + "): " + ex.what();
    } catch (const DivergenceError& ex) {
        trace.error = std::string("divergence: ") + ex.what();
    }
    for (int i = 0; i < n; ++i) trace.apps[static_cast<std::size_t>(i)].switches = loops[static_cast<std::size_t>(i)]->switches();
    trace.bus = bus.log();
    return trace;
}

}  // namespace adaptswitch
