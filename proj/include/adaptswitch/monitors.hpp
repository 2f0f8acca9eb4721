#pragma once

// Verdicts over a finished trace.

#include "adaptswitch/scenario.hpp"
#include "adaptswitch/trace.hpp"

#include <string>
#include <vector>

namespace adaptswitch {

struct MonitorResult {
    std::string name;
    int app = -1;       // -1 for bus-wide monitors
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct ContainmentReport {
    int violations_impulse = 0;      // impulse without |e| > eth and TT within d2 samples
    int violations_containment = 0;  // return to ET with |e| > eth in the first m2+d2 samples
    int violations_et_length = 0;    // ET phase of 2 samples or fewer
    int returns_to_et = 0;
    int impulses = 0;
    double worst_containment = 0.0;  // max |e| over the containment windows
    long shortest_et_phase = -1;
};

/// Switching checks for one application: impulse detection, containment
/// after each return to ET and ET phase length.
[[nodiscard]] ContainmentReport containment_check(const AppTrace& app, int d2);

/// Largest dV over samples where the mode is unchanged since the previous
/// sample and no switch happens.
[[nodiscard]] double max_dv_within_mode(const AppTrace& app);

/// Switches at or after sample `from`.
[[nodiscard]] long switches_from(const AppTrace& app, long from);

/// Per-cycle minislot accounting: consumed = idle slots + message lengths,
/// every visited slot number is idle or carries one message, and the budget
/// is never exceeded.
[[nodiscard]] bool minislots_conserved(const MinislotReport& r, int budget);

[[nodiscard]] std::vector<MonitorResult> evaluate_monitors(const Trace& trace, const ScenarioConfig& config);

[[nodiscard]] bool all_pass(const std::vector<MonitorResult>& results);

[[nodiscard]] std::string format_result(const MonitorResult& r);

}  // namespace adaptswitch
