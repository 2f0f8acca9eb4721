#include "adaptswitch/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace adaptswitch {

namespace {

bool next_is_tt(const TraceRow& r) {
    return r.switch_code == 2 || (r.mode == LoopMode::TT && r.switch_code != 1);
}

MonitorResult result(std::string name, int app, bool pass, double measured, double threshold,
                     std::string detail = {}) {
    return MonitorResult{std::move(name), app, pass, measured, threshold, std::move(detail)};
}

}  // namespace

ContainmentReport containment_check(const AppTrace& app, int d2) {
    ContainmentReport rep;
    const auto& rows = app.rows;
    const auto n = static_cast<long>(rows.size());

    for (long t : app.impulses) {
        if (t + d2 >= n) continue;
        ++rep.impulses;
        bool ok = false;
        for (long j = t; j <= t + d2 && !ok; ++j) {
            const auto& r = rows[static_cast<std::size_t>(j)];
            ok = std::abs(r.e) > app.eth && next_is_tt(r);
        }
        if (!ok) ++rep.violations_impulse;
    }

    const int span = app.m2 + d2;
    for (long kp = 0; kp < n; ++kp) {
        if (rows[static_cast<std::size_t>(kp)].switch_code != 1) continue;
        ++rep.returns_to_et;
        bool contained = true;
        for (int l = 0; l < span && kp + 1 + l < n; ++l) {
            const double e = std::abs(rows[static_cast<std::size_t>(kp + 1 + l)].e);
            rep.worst_containment = std::max(rep.worst_containment, e);
            if (e > app.eth) contained = false;
        }
        if (!contained) ++rep.violations_containment;

        long kq = kp + 1;
        while (kq < n && rows[static_cast<std::size_t>(kq)].switch_code != 2) ++kq;
        if (kq < n) {
            const long len = kq - kp;
            if (rep.shortest_et_phase < 0 || len < rep.shortest_et_phase) rep.shortest_et_phase = len;
            if (len <= 2) ++rep.violations_et_length;
        }
    }
    return rep;
}

double max_dv_within_mode(const AppTrace& app) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < app.rows.size(); ++k) {
        const auto& r = app.rows[k];
        const auto& prev = app.rows[k - 1];
        if (r.switch_code != 0 || prev.switch_code != 0 || r.mode != prev.mode || std::isnan(r.dV)) continue;
        worst = std::max(worst, r.dV);
    }
    return worst;
}

long switches_from(const AppTrace& app, long from) {
    return static_cast<long>(std::count_if(app.switches.begin(), app.switches.end(),
                                           [&](const SwitchEvent& e) { return e.k >= from; }));
}

bool minislots_conserved(const MinislotReport& r, int budget) {
    return r.consumed == r.idle_slots + r.length_sum &&
           r.slot_numbers == r.idle_slots + static_cast<int>(r.transmitted.size()) && r.consumed <= budget &&
           r.consumed >= 0;
}

std::vector<MonitorResult> evaluate_monitors(const Trace& trace, const ScenarioConfig& config) {
    std::vector<MonitorResult> out;
    const auto& m = config.monitors;
    if (trace.error) out.push_back(result("run_completed", -1, false, 0, 0, *trace.error));

    for (const auto& app : trace.apps) {
        const int a = app.app;
        double peak = 0.0;
        bool finite = true;
        for (const auto& r : app.rows) {
            for (double v : {r.y, r.u, r.theta_norm}) {
                if (!std::isfinite(v)) finite = false;
                peak = std::max(peak, std::abs(v));
            }
        }
        std::string premise;
        if (m.min_dwell && app.impulses.size() >= 2) {
            long gap = std::numeric_limits<long>::max();
            for (std::size_t i = 1; i < app.impulses.size(); ++i) gap = std::min(gap, app.impulses[i] - app.impulses[i - 1]);
            if (gap < *m.min_dwell) {
                premise = "premise violated: impulse gap " + std::to_string(gap) + " < minimum dwell " +
                          std::to_string(*m.min_dwell);
            }
        }
        out.push_back(result("boundedness", a, finite && peak < m.bound, peak, m.bound, premise));

        if (m.tracking) {
            double worst = 0.0;
            long counted = 0;
            for (const auto& r : app.rows) {
                if (r.k < m.tracking->from) continue;
                ++counted;
                worst = std::max(worst, std::abs(r.e));
            }
            out.push_back(result("tracking", a, counted > 0 && worst < m.tracking->tol, worst, m.tracking->tol,
                                 counted > 0 ? "" : "no samples after the settling index"));
        }

        const auto final_rows = [&](long window) {
            const auto n = static_cast<long>(app.rows.size());
            return std::max<long>(0, n - window);
        };
        if (m.rank) {
            bool ok = !app.rows.empty();
            std::set<int> seen;
            for (auto i = static_cast<std::size_t>(final_rows(m.rank->final_window)); i < app.rows.size(); ++i) {
                seen.insert(app.rows[i].rank);
                ok = ok && app.rows[i].rank == m.rank->expected;
            }
            std::string detail = "ranks seen:";
            for (int r : seen) detail += " " + std::to_string(r);
            out.push_back(result("excitation_rank", a, ok, app.rows.empty() ? 0 : app.rows.back().rank,
                                 m.rank->expected, detail));
        }
        if (m.orthogonality) {
            double worst = 0.0;
            bool hidden = false;
            for (auto i = static_cast<std::size_t>(final_rows(m.orthogonality->final_window)); i < app.rows.size(); ++i) {
                const double v = app.rows[i].orth_residual;
                if (std::isnan(v)) hidden = true;
                else worst = std::max(worst, v);
            }
            out.push_back(result("orthogonality", a, !hidden && !app.rows.empty() && worst < m.orthogonality->tol,
                                 worst, m.orthogonality->tol, hidden ? "true parameters hidden" : ""));
        }
        if (m.switching && config.controller == ControllerKind::Switching) {
            const auto rep = containment_check(app, trace.d2);
            out.push_back(result("impulse_triggers_tt", a, rep.violations_impulse == 0, rep.violations_impulse, 0,
                                 std::to_string(rep.impulses) + " impulses"));
            out.push_back(result("et_containment", a, rep.violations_containment == 0, rep.worst_containment,
                                 app.eth,
                                 std::to_string(rep.violations_containment) + " of " +
                                     std::to_string(rep.returns_to_et) + " returns to ET exceed eth"));
            out.push_back(result("et_phase_length", a, rep.violations_et_length == 0,
                                 static_cast<double>(rep.shortest_et_phase), 2,
                                 std::to_string(rep.violations_et_length) + " ET phases of 2 samples or fewer"));
            const double dv = max_dv_within_mode(app);
            out.push_back(result("lyapunov_nonincreasing", a, !(dv > m.switching->dv_tol), dv, m.switching->dv_tol));
            if (app.impulses.empty()) {
                const long late = switches_from(app, m.switching->quiet_from);
                out.push_back(result("quiescence", a, late == 0, static_cast<double>(late), 0,
                                     "switches at or after k=" + std::to_string(m.switching->quiet_from)));
            }
        }
        if (m.reference_sr && app.reference_sr_declared && app.reference_sr_measured) {
            out.push_back(result("reference_sr_order", a, *app.reference_sr_declared == *app.reference_sr_measured,
                                 *app.reference_sr_measured, *app.reference_sr_declared));
        }
    }

    if (m.bus && !trace.bus.empty()) {
        const int budget = config.minislots_per_cycle;
        int worst_et = 0;
        long et_late = 0;
        for (const auto& c : trace.bus) {
            for (const auto& t : c.transmitted) {
                worst_et = std::max(worst_et, t.delay());
                if (t.delay() > trace.d2) ++et_late;
            }
        }
        out.push_back(result("et_delay_bound", -1, et_late == 0, worst_et, trace.d2));

        std::map<long, const MinislotReport*> by_cycle;
        for (const auto& c : trace.bus) by_cycle[c.cycle] = &c;
        long tt_rows = 0, tt_bad = 0;
        for (const auto& app : trace.apps) {
            for (const auto& r : app.rows) {
                if (r.mode == LoopMode::ET) continue;
                ++tt_rows;
                const auto it = by_cycle.find(r.k);
                const bool sent = it != by_cycle.end() &&
                                  std::find(it->second->static_senders.begin(), it->second->static_senders.end(),
                                            app.app) != it->second->static_senders.end();
                if (!sent || (r.mode == LoopMode::TT && r.delay != 1)) ++tt_bad;
            }
        }
        out.push_back(result("tt_delay_one", -1, tt_bad == 0, static_cast<double>(tt_bad), 0,
                             std::to_string(tt_rows) + " static-slot messages"));

        long broken = 0;
        for (const auto& c : trace.bus) {
            if (!minislots_conserved(c, budget)) ++broken;
        }
        out.push_back(result("minislot_conservation", -1, broken == 0, static_cast<double>(broken), 0,
                             std::to_string(trace.bus.size()) + " cycles"));
    }
    return out;
}

bool all_pass(const std::vector<MonitorResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const MonitorResult& r) { return r.pass; });
}

std::string format_result(const MonitorResult& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %-24s %-6s measured=%.6g threshold=%.6g", r.pass ? "PASS" : "FAIL",
                  r.name.c_str(), r.app < 0 ? "bus" : ("app" + std::to_string(r.app)).c_str(), r.measured,
                  r.threshold);
    std::string s = buf;
    if (!r.detail.empty()) s += "  (" + r.detail + ")";
    return s;
}

}  // namespace adaptswitch
