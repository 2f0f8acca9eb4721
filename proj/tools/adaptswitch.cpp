// adaptswitch: run, check and analyze switching adaptive control scenarios.
// Exit codes: 0 all monitors pass, 1 a monitor failed, 2 configuration or
// runtime error.

#include "adaptswitch/errors.hpp"
#include "adaptswitch/monitors.hpp"
#include "adaptswitch/scenario.hpp"
#include "adaptswitch/trace.hpp"

#include <CLI11.hpp>

#include <climits>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace adaptswitch;

namespace {

int report(const std::vector<MonitorResult>& results) {
    for (const auto& r : results) std::cout << format_result(r) << '\n';
    return all_pass(results) ? 0 : 1;
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir, std::optional<std::uint64_t> seed,
            const std::string& format) {
    auto cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    const Trace trace = run_scenario(cfg);

    fs::create_directories(out_dir);
    const bool json = format == "json";
    const fs::path out = out_dir / (cfg.name + (json ? ".json" : ".csv"));
    export_trace(trace, out, json ? TraceFormat::Json : TraceFormat::Csv);

    const auto s = trace.summary(cfg.monitors.tracking ? cfg.monitors.tracking->tol : 1e-3);
    std::cout << "trace " << out.string() << '\n'
              << "samples " << trace.horizon << " apps " << trace.apps.size() << " switches " << s.switch_count
              << " max|y| " << s.max_abs_y << " max|u| " << s.max_abs_u << " settling " << s.settling_sample << '\n';
    const int verdict = report(evaluate_monitors(trace, cfg));
    if (trace.error) {
        std::cerr << "error: " << *trace.error << '\n';
        return 2;
    }
    return verdict;
}

int cmd_check(const fs::path& config_path) {
    const auto cfg = load_config(config_path);
    std::cout << "ok: " << cfg.name << ", " << cfg.apps.size() << " plant(s), horizon " << cfg.horizon << ", d2 "
              << cfg.d2 << '\n';
    return 0;
}

int cmd_analyze(const fs::path& trace_path, const std::optional<fs::path>& config_path) {
    const Trace trace = import_trace(trace_path);
    ScenarioConfig cfg;
    if (config_path) {
        cfg = load_config(*config_path);
    } else {
        cfg.minislots_per_cycle = INT_MAX;
        cfg.d2 = trace.d2;
        const bool fixed = !trace.apps.empty() && !trace.apps.front().rows.empty() &&
                           trace.apps.front().rows.front().mode == LoopMode::Fixed;
        cfg.controller = fixed ? ControllerKind::Fixed : ControllerKind::Switching;
    }
    const int verdict = report(evaluate_monitors(trace, cfg));
    return trace.error ? 2 : verdict;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switching adaptive control over a hybrid TT/ET bus"};
    app.require_subcommand(1);

    std::string config, out_dir = "out", format = "csv", trace_file, analyze_config;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Run a scenario and write its trace");
    run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--format", format, "Trace format")->check(CLI::IsMember({"csv", "json"}));

    auto* check = app.add_subcommand("check", "Validate a scenario without running it");
    check->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

    auto* analyze = app.add_subcommand("analyze", "Re-run the monitors on a saved trace");
    analyze->add_option("--trace", trace_file, "Trace file (.csv or .json)")->required()->check(CLI::ExistingFile);
    analyze->add_option("--config", analyze_config, "Scenario JSON with monitor thresholds")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, out_dir, seed, format);
        if (*check) return cmd_check(config);
        if (*analyze) {
            return cmd_analyze(trace_file,
                               analyze_config.empty() ? std::nullopt : std::optional<fs::path>(analyze_config));
        }
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
