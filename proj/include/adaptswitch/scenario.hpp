#pragma once

// Scenario configuration (JSON) and the deterministic multi-application run
// loop on one shared bus.

#include "adaptswitch/bus.hpp"
#include "adaptswitch/plant.hpp"
#include "adaptswitch/supervisor.hpp"
#include "adaptswitch/trace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace adaptswitch {

struct SinusoidTerm {
    double amplitude = 1.0;
    double frequency = 0.1;  // rad/sample
    double phase = 0.0;
};

struct ReferenceSpec {
    enum class Kind { Constant, Sinusoid, Square, File };
    Kind kind = Kind::Constant;
    double value = 1.0;        // constant level, sinusoid/square offset
    std::vector<SinusoidTerm> terms;
    double amplitude = 1.0;    // square
    long period = 100;         // square, samples
    std::filesystem::path path;
    std::optional<int> sr_order;  // declared nominal order

    /// Declared order, or the order implied by the generator (constant 1,
    /// k distinct sinusoids 2k plus 1 for a nonzero offset); none for
    /// square waves and files without a declaration.
    [[nodiscard]] std::optional<int> nominal_sr_order() const;
};

/// yref(0 .. len-1). File references are read as one number per line and
/// must cover len samples.
[[nodiscard]] std::vector<double> generate_reference(const ReferenceSpec& spec, std::size_t len);

struct DisturbanceSpec {
    enum class Kind { None, Impulses, Random };
    Kind kind = Kind::None;
    long tdw = 500;
    std::vector<long> times;
    std::vector<double> amplitudes{1.0};
};

[[nodiscard]] DisturbanceTrain make_disturbance(const DisturbanceSpec& spec, long horizon, std::uint64_t seed);

struct AppSpec {
    PlantModel plant;       // physical delay 1 for the switching controller
    InitialConditions ic;
    bool theta_visible = true;
    ReferenceSpec reference;
    DisturbanceSpec disturbance;
    AppBusConfig bus;
    std::optional<Eigen::VectorXd> theta1_init;
    std::optional<Eigen::VectorXd> theta2_init;
};

enum class ControllerKind { Switching, Fixed };

struct MonitorSpec {
    double bound = 1e3;
    std::optional<long> min_dwell;          // Tdw premise for boundedness
    struct Tracking { double tol = 1e-3; long from = 0; };
    std::optional<Tracking> tracking;
    struct Rank { int expected = 2; long final_window = 500; };
    std::optional<Rank> rank;
    struct Orthogonality { double tol = 1e-3; long final_window = 500; };
    std::optional<Orthogonality> orthogonality;
    struct Switching { double dv_tol = 1e-9; long quiet_from = 1000; };
    std::optional<Switching> switching;
    bool bus = true;
    bool reference_sr = true;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::vector<AppSpec> apps;
    ControllerKind controller = ControllerKind::Switching;
    Policy policy = Policy::Switching;
    int fixed_delay = 1;
    int d2 = 2;
    int minislots_per_cycle = 16;
    long horizon = 1000;
    std::uint64_t seed = 1;
    double gamma1 = 0.5;
    double gamma2 = 0.5;
    std::size_t gram_window = 0;  // 0 = 9 * (m1 + m2 + d2)
    double rank_tol = kDefaultRankTol;
    MonitorSpec monitors;

    [[nodiscard]] BusConfig bus_config() const;
    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses and validates a JSON scenario. Syntax errors report line and
/// column; relative reference files resolve against `base_dir`.
[[nodiscard]] ScenarioConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);

/// Runs every application for config.horizon samples. Divergence and bus
/// infeasibility end the run early; the partial trace carries the diagnostic.
[[nodiscard]] Trace run_scenario(const ScenarioConfig& config);

}  // namespace adaptswitch
