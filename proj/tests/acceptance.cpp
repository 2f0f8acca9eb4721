// Acceptance run: one PASS/FAIL line per criterion. Exit status 0 only when
// every criterion passes. Optional argument: scenario directory.

#include "adaptswitch/bus.hpp"
#include "adaptswitch/excitation.hpp"
#include "adaptswitch/monitors.hpp"
#include "adaptswitch/plant.hpp"
#include "adaptswitch/scenario.hpp"
#include "adaptswitch/shift_polynomial.hpp"
#include "adaptswitch/trace.hpp"

#include "test_support.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#ifndef ADAPTSWITCH_SCENARIO_DIR
#define ADAPTSWITCH_SCENARIO_DIR "scenarios"
#endif

using namespace adaptswitch;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

fs::path g_scenarios = ADAPTSWITCH_SCENARIO_DIR;

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// Independent residual: convolve F and A by hand and add q^-d alpha.
double identity_residual(const ShiftPolynomial& A, const DiophantineSolution& s, int d) {
    const auto& a = A.coeffs();
    const auto& f = s.F.coeffs();
    const auto& al = s.alpha.coeffs();
    std::vector<double> r(std::max(a.size() + f.size() - 1, al.size() + static_cast<std::size_t>(d)), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) r[i + j] += f[i] * a[j];
    }
    for (std::size_t i = 0; i < al.size(); ++i) r[i + static_cast<std::size_t>(d)] += al[i];
    r[0] -= 1.0;
    double worst = 0.0;
    for (double c : r) worst = std::max(worst, std::abs(c));
    return worst;
}

Verdict diophantine_identity() {
    Verdict v;
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    int cases = 0, unstable = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int deg = testsupport::uniform_int(rng, 0, 4);
        const auto A = testsupport::random_monic(rng, deg, -2.0, 2.0);
        if (deg > 0 && !zeros_strictly_inside(A, 0.0)) ++unstable;
        for (int d = 1; d <= 3; ++d) {
            worst = std::max(worst, identity_residual(A, solve_diophantine(A, d), d));
            ++cases;
        }
    }
    v.require(worst < 1e-12, "residual " + fmt(worst));
    v.require(unstable > 0, "no unstable A drawn");
    v.detail = std::to_string(cases) + " cases (" + std::to_string(unstable) + " unstable A), max residual " +
               fmt(worst) + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict predictor_equivalence() {
    Verdict v;
    std::mt19937_64 rng(2002);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int m1 = testsupport::uniform_int(rng, 1, 3);
        const int m2 = testsupport::uniform_int(rng, 0, 2);
        const auto base = testsupport::random_plant(rng, m1, m2, 1);
        const auto D = make_random_impulse_train(20, 200, {testsupport::uniform(rng, -1, 1)}, rng());
        std::vector<double> u(200);
        for (double& x : u) x = testsupport::uniform(rng, -1, 1);
        for (int d = 1; d <= 2; ++d) {
            auto model = base;
            model.delay = d;
            model.validate();
            const auto pc = predictor_coeffs(model.A(), model.B(), d);
            auto hist = SignalHistory::for_plant(model, d);
            std::vector<double> predicted(200 + static_cast<std::size_t>(d), 0.0);
            for (long k = 0; k < 200; ++k) {
                const auto uk = u[static_cast<std::size_t>(k)];
                predicted[static_cast<std::size_t>(k + d)] =
                    step_predictor(pc.alpha, pc.beta, hist, uk, predictor_disturbance(pc.F, D, k));
                const double y = step_difference(model, hist, uk, D);
                if (k + 1 >= d) worst = std::max(worst, std::abs(y - predicted[static_cast<std::size_t>(k + 1)]));
            }
        }
    }
    v.require(worst < 1e-9, "deviation " + fmt(worst));
    v.detail = "50 plants x d in {1,2}, 200 steps, max |y_diff - y_pred| " + fmt(worst) +
               (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

ScenarioConfig load(const std::string& name) { return load_config(g_scenarios / (name + ".json")); }

const MonitorResult* find(const std::vector<MonitorResult>& rs, const std::string& name, int app) {
    for (const auto& r : rs) {
        if (r.name == name && r.app == app) return &r;
    }
    return nullptr;
}

void require_monitor(Verdict& v, const std::string& scenario, const std::vector<MonitorResult>& rs,
                     const std::string& name, int app) {
    const auto* r = find(rs, name, app);
    const std::string who = scenario + " " + name + (app >= 0 ? " app" + std::to_string(app) : "");
    if (!r) {
        v.require(false, who + " missing");
        return;
    }
    v.require(r->pass, who + " measured " + fmt(r->measured) + (r->detail.empty() ? "" : " (" + r->detail + ")"));
}

void require_completed(Verdict& v, const std::string& scenario, const Trace& t) {
    v.require(!t.error, scenario + " stopped early: " + t.error.value_or(""));
    for (const auto& a : t.apps) {
        v.require(static_cast<long>(a.rows.size()) == t.horizon, scenario + " short trace");
    }
}

bool is_fixed_tracking_setup(const ScenarioConfig& c, int d) {
    if (c.controller != ControllerKind::Fixed || c.fixed_delay != d || c.horizon != 5000 || c.apps.size() != 1) {
        return false;
    }
    const auto& a = c.apps[0];
    return a.plant.m1() == 2 && a.plant.m2() == 1 && zeros_strictly_inside(a.plant.B()) &&
           a.disturbance.kind == DisturbanceSpec::Kind::None && a.reference.kind == ReferenceSpec::Kind::Sinusoid;
}

Verdict fixed_delay_tracking() {
    Verdict v;
    std::string summary;
    for (int d : {1, 2}) {
        const std::string name = "fixed_tracking_d" + std::to_string(d);
        auto cfg = load(name);
        v.require(is_fixed_tracking_setup(cfg, d), name + " setup differs from m1=2, m2=1, D=0, sinusoid, 5000");
        cfg.monitors = MonitorSpec{};
        cfg.monitors.bound = 1e3;
        cfg.monitors.tracking = MonitorSpec::Tracking{1e-3, 2000};
        const auto t = run_scenario(cfg);
        require_completed(v, name, t);
        const auto rs = evaluate_monitors(t, cfg);
        require_monitor(v, name, rs, "tracking", 0);
        require_monitor(v, name, rs, "boundedness", 0);
        const auto* tr = find(rs, "tracking", 0);
        const auto* bd = find(rs, "boundedness", 0);
        summary += "d=" + std::to_string(d) + " max|e| " + fmt(tr ? tr->measured : NAN) + " peak " +
                   fmt(bd ? bd->measured : NAN) + " ";
    }
    v.detail = summary + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

Verdict excited_subspace() {
    Verdict v;
    std::string summary;
    for (int d : {1, 2}) {
        const std::string name = "fixed_tracking_d" + std::to_string(d);
        auto cfg = load(name);
        v.require(is_fixed_tracking_setup(cfg, d), name + " setup differs");
        const auto& ref = cfg.apps[0].reference;
        v.require(ref.terms.size() == 1 && ref.value == 0.0 && ref.nominal_sr_order() == 2,
                  name + " reference is not a single sinusoid");
        cfg.rank_tol = 1e-6;
        cfg.monitors = MonitorSpec{};
        cfg.monitors.rank = MonitorSpec::Rank{2, 500};
        cfg.monitors.orthogonality = MonitorSpec::Orthogonality{1e-3, 500};
        const auto t = run_scenario(cfg);
        require_completed(v, name, t);
        const auto rs = evaluate_monitors(t, cfg);
        require_monitor(v, name, rs, "excitation_rank", 0);
        require_monitor(v, name, rs, "orthogonality", 0);
        require_monitor(v, name, rs, "reference_sr_order", 0);
        const auto* o = find(rs, "orthogonality", 0);
        summary += "d=" + std::to_string(d) + " rank " + std::to_string(t.apps[0].rows.back().rank) + " orth " +
                   fmt(o ? o->measured : NAN) + " ";
    }
    v.detail = summary + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

// Rank oracle: eigenvalues of an explicitly summed state Gram.
int eigen_oracle_rank(const std::vector<Eigen::VectorXd>& xs, double tol) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(xs.front().size(), xs.front().size());
    for (const auto& x : xs) G.noalias() += x * x.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const auto ev = es.eigenvalues();
    const double top = ev.maxCoeff();
    if (top <= 0.0) return 0;
    return static_cast<int>((ev.array() > tol * top).count());
}

Verdict reachable_state_gram() {
    Verdict v;
    std::mt19937_64 rng(5005);
    constexpr int n = 3;
    constexpr std::size_t N = 8 * n;
    constexpr std::size_t t0 = 500;
    int systems = 0;
    std::string ranks;
    while (systems < 10) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n * n; ++i) A(i / n, i % n) = testsupport::uniform(rng, -1, 1);
        const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues().cwiseAbs().maxCoeff();
        A *= testsupport::uniform(rng, 0.3, 0.8) / rho;
        Eigen::MatrixXd B(n, 1);
        for (int i = 0; i < n; ++i) B(i, 0) = testsupport::uniform(rng, -1, 1);
        if (reachability_rank(A, B) != n) continue;
        ++systems;

        const double w = testsupport::uniform(rng, 0.2, 2.8);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        std::vector<double> u;
        std::vector<Eigen::VectorXd> window;
        GramWindow gram(n, N);
        for (std::size_t t = 0; t < t0 + n + N; ++t) {
            if (t >= t0 + n) {
                gram.push(x);
                window.push_back(x);
            }
            u.push_back(std::sin(w * static_cast<double>(t)));
            x = A * x + B * u.back();
        }
        const int input_order = sr_order(u, 3, 200);
        const int rank = subspace_basis(gram, kDefaultRankTol).rank;
        const int oracle = eigen_oracle_rank(window, kDefaultRankTol);
        ranks += std::to_string(rank);
        v.require(input_order == 2, "input SR order " + std::to_string(input_order));
        v.require(rank == 2, "system " + std::to_string(systems) + " rank " + std::to_string(rank));
        v.require(rank == oracle, "system " + std::to_string(systems) + " oracle " + std::to_string(oracle));
    }
    v.detail = "10 reachable 3-state systems, ranks " + ranks + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

bool is_switching_setup(const ScenarioConfig& c, std::size_t apps, bool impulses) {
    if (c.controller != ControllerKind::Switching || c.policy != Policy::Switching || c.d2 != 2 ||
        c.horizon != 5000 || c.apps.size() != apps) {
        return false;
    }
    for (const auto& a : c.apps) {
        if (a.bus.eth != 0.05) return false;
        if (!impulses) {
            if (a.disturbance.kind != DisturbanceSpec::Kind::None) return false;
            continue;
        }
        const auto& d = a.disturbance;
        if (d.kind != DisturbanceSpec::Kind::Impulses || d.tdw != 500 || d.amplitudes != std::vector<double>{1.0} ||
            d.times.empty()) {
            return false;
        }
        for (std::size_t i = 1; i < d.times.size(); ++i) {
            if (d.times[i] - d.times[i - 1] < 500) return false;
        }
    }
    return true;
}

Verdict switching_boundedness() {
    Verdict v;
    std::string summary;
    const std::vector<std::pair<std::string, std::size_t>> runs = {{"switching_one_app", 1},
                                                                   {"switching_three_apps", 3}};
    for (const auto& [name, n] : runs) {
        auto cfg = load(name);
        v.require(is_switching_setup(cfg, n, true), name + " setup differs from d2=2, eth=0.05, Tdw=500, amp 1");
        cfg.monitors = MonitorSpec{};
        cfg.monitors.bound = 1e3;
        cfg.monitors.switching = MonitorSpec::Switching{1e-9, 1000};
        const auto t = run_scenario(cfg);
        require_completed(v, name, t);
        const auto rs = evaluate_monitors(t, cfg);
        long returns = 0, impulses = 0;
        for (const auto& a : t.apps) {
            for (const char* m : {"impulse_triggers_tt", "et_containment", "et_phase_length",
                                  "lyapunov_nonincreasing", "boundedness"}) {
                require_monitor(v, name, rs, m, a.app);
            }
            const auto rep = containment_check(a, t.d2);
            returns += rep.returns_to_et;
            impulses += rep.impulses;
            v.require(rep.impulses == static_cast<int>(cfg.apps[static_cast<std::size_t>(a.app)].disturbance.times.size()),
                      name + " impulses not all inside the horizon");
        }
        summary += name + ": " + std::to_string(impulses) + " impulses, " + std::to_string(returns) +
                   " returns to ET, " + std::to_string(t.summary().switch_count) + " switches; ";
    }
    for (const auto& [name, n] : std::vector<std::pair<std::string, std::size_t>>{{"quiet_one_app", 1},
                                                                                  {"quiet_three_apps", 3}}) {
        auto cfg = load(name);
        v.require(is_switching_setup(cfg, n, false), name + " setup differs");
        cfg.monitors = MonitorSpec{};
        cfg.monitors.bound = 1e3;
        cfg.monitors.switching = MonitorSpec::Switching{1e-9, 1000};
        const auto t = run_scenario(cfg);
        require_completed(v, name, t);
        const auto rs = evaluate_monitors(t, cfg);
        for (const auto& a : t.apps) {
            require_monitor(v, name, rs, "quiescence", a.app);
            require_monitor(v, name, rs, "boundedness", a.app);
        }
        summary += name + ": " + std::to_string(t.summary().switch_count) + " switches before k=1000; ";
    }
    v.detail = summary + (v.detail.empty() ? "" : "| " + v.detail);
    return v;
}

Verdict bus_model() {
    Verdict v;
    v.require(select_mode(0.05, 0.05) == Mode::ET, "|e| = eth does not select ET");
    v.require(select_mode(-0.05, 0.05) == Mode::ET, "e = -eth does not select ET");
    v.require(select_mode(std::nextafter(0.05, 1.0), 0.05) == Mode::TT, "|e| just above eth does not select TT");

    std::string summary;
    for (const auto policy : {Policy::Switching, Policy::ETOnly}) {
        auto cfg = load("switching_three_apps");
        cfg.policy = policy;
        cfg.monitors = MonitorSpec{};
        const std::string name = policy == Policy::ETOnly ? "three_apps_et_only" : "switching_three_apps";
        const auto t = run_scenario(cfg);
        require_completed(v, name, t);
        const auto rs = evaluate_monitors(t, cfg);
        for (const char* m : {"et_delay_bound", "tt_delay_one", "minislot_conservation"}) {
            require_monitor(v, name, rs, m, -1);
        }
        long et = 0, tt = 0;
        int worst = 0;
        for (const auto& c : t.bus) {
            et += static_cast<long>(c.transmitted.size());
            tt += static_cast<long>(c.static_senders.size());
            for (const auto& m : c.transmitted) worst = std::max(worst, m.delay());
        }
        v.require(et > 0, name + " carried no ET messages");
        summary += name + ": " + std::to_string(et) + " ET messages (max delay " + std::to_string(worst) + "), " +
                   std::to_string(tt) + " TT messages; ";
    }
    v.detail = summary + "|e| = eth selects ET" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

Verdict determinism_and_io() {
    Verdict v;
    auto cfg = load("switching_three_apps");
    cfg.apps[1].theta_visible = false;  // NaN monitor columns in the round trip
    const auto a = run_scenario(cfg);
    const auto b = run_scenario(cfg);
    const auto csv = to_csv(a);
    v.require(csv == to_csv(b), "repeated runs differ");

    std::istringstream in(csv);
    const auto back = read_csv(in);
    bool rows_ok = back.apps.size() == a.apps.size();
    std::size_t values = 0;
    for (std::size_t i = 0; rows_ok && i < a.apps.size(); ++i) {
        rows_ok = back.apps[i].rows.size() == a.apps[i].rows.size();
        for (std::size_t k = 0; rows_ok && k < a.apps[i].rows.size(); ++k) {
            const auto& x = a.apps[i].rows[k];
            const auto& y = back.apps[i].rows[k];
            for (const auto& [p, q] : {std::pair{x.y, y.y}, {x.yref, y.yref}, {x.yref_prime, y.yref_prime},
                                      {x.e, y.e}, {x.u, y.u}, {x.V, y.V}, {x.dV, y.dV}, {x.phi_err, y.phi_err},
                                      {x.orth_residual, y.orth_residual}, {x.disturbance, y.disturbance},
                                      {x.theta_norm, y.theta_norm}}) {
                rows_ok = rows_ok && same_bits(p, q);
                ++values;
            }
            rows_ok = rows_ok && x.k == y.k && x.mode == y.mode && x.delay == y.delay && x.rank == y.rank &&
                      x.switch_code == y.switch_code;
        }
    }
    v.require(rows_ok, "CSV round trip changed a value");
    v.require(from_json(to_json(a)) == a, "JSON round trip changed the trace");
    v.detail = std::to_string(csv.size()) + " CSV bytes identical across runs, " + std::to_string(values) +
               " values bit-identical after CSV, JSON trace equal" + (v.detail.empty() ? "" : "; " + v.detail);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_scenarios = argv[1];
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
        {"diophantine_identity", diophantine_identity},
        {"predictor_equivalence", predictor_equivalence},
        {"fixed_delay_tracking", fixed_delay_tracking},
        {"excited_subspace", excited_subspace},
        {"reachable_state_gram", reachable_state_gram},
        {"switching_boundedness", switching_boundedness},
        {"bus_model", bus_model},
        {"determinism_and_io", determinism_and_io},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << v.detail << '\n';
    }
    return failed == 0 ? 0 : 1;
}
