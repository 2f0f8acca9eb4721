#pragma once

// Run traces and their CSV / JSON forms.

#include "adaptswitch/bus.hpp"
#include "adaptswitch/supervisor.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace adaptswitch {

inline constexpr const char* kTraceSchemaVersion = "1";
inline constexpr const char* kCsvHeader =
    "app,k,mode,y,yref,yref_prime,e,u,delay,V,dV,phi_err,rank,orth_residual,switch,disturbance,theta_norm";

struct AppTrace {
    int app = 0;
    std::vector<TraceRow> rows;
    std::vector<SwitchEvent> switches;
    std::vector<long> impulses;   // disturbance instants within the horizon
    int m2 = 0;
    double eth = 0.05;
    std::optional<int> reference_sr_declared;
    std::optional<int> reference_sr_measured;

    friend bool operator==(const AppTrace&, const AppTrace&) = default;
};

struct TraceSummary {
    double max_abs_y = 0.0;
    double max_abs_u = 0.0;
    double max_theta_norm = 0.0;
    long switch_count = 0;
    long settling_sample = -1;  // first k after which |e| stays below the tracking tolerance

    friend bool operator==(const TraceSummary&, const TraceSummary&) = default;
};

struct Trace {
    std::string scenario;
    long horizon = 0;
    int d2 = 2;
    std::vector<AppTrace> apps;
    std::vector<MinislotReport> bus;
    std::optional<std::string> error;  // set when the run stopped early

    [[nodiscard]] TraceSummary summary(double tracking_tol = 1e-3) const;
};

bool operator==(const Transmission& a, const Transmission& b);
bool operator==(const MinislotReport& a, const MinislotReport& b);
bool operator==(const Trace& a, const Trace& b);

/// Trace rows as CSV (header kCsvHeader, %.17g numbers).
void write_csv(std::ostream& out, const Trace& trace);
[[nodiscard]] std::string to_csv(const Trace& trace);
/// Rows only: switch logs and bus records are rebuilt from the switch column
/// where possible and otherwise left empty.
[[nodiscard]] Trace read_csv(std::istream& in);

[[nodiscard]] std::string to_json(const Trace& trace);
[[nodiscard]] Trace from_json(const std::string& text);

enum class TraceFormat { Csv, Json };

/// Throws std::runtime_error naming the path on I/O failure.
void export_trace(const Trace& trace, const std::filesystem::path& path, TraceFormat format);
[[nodiscard]] Trace import_trace(const std::filesystem::path& path);

}  // namespace adaptswitch
