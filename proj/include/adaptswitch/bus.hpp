#pragma once

// Hybrid TT/ET bus: one communication cycle per sample, a static segment with
// one slot per application (delay 1) and a minislot-arbitrated dynamic
// segment (delay at most d2).

#include <deque>
#include <optional>
#include <string_view>
#include <vector>

namespace adaptswitch {

enum class Mode { TT, ET };

[[nodiscard]] std::string_view to_string(Mode m) noexcept;

/// ET iff |e| <= eth. Throws std::invalid_argument unless eth > 0.
[[nodiscard]] Mode select_mode(double e, double eth);

struct AppBusConfig {
    int static_slot = 0;
    int dyn_priority = 0;    // dynamic slot number; lower transmits first
    int message_length = 1;  // minislots
    double eth = 0.05;
};

struct BusConfig {
    std::vector<AppBusConfig> apps;
    int minislots_per_cycle = 16;
    int d2 = 2;

    [[nodiscard]] int n_apps() const noexcept { return static_cast<int>(apps.size()); }
    /// Throws ConfigError on d2 < 2, eth <= 0, non-positive lengths or budget,
    /// or duplicate slots / priorities.
    void validate() const;
};

struct Delivery {
    Mode mode = Mode::TT;
    long submit = 0;
    long delivery_sample = 0;  // sample whose output first sees the command
    int nominal_delay = 1;     // 1 (TT) or d2 (ET)
};

struct Transmission {
    int app = 0;
    long submit_cycle = 0;
    long delivery_cycle = 0;
    int length = 1;
    [[nodiscard]] int delay() const noexcept { return static_cast<int>(delivery_cycle - submit_cycle) + 1; }
};

struct MinislotReport {
    long cycle = 0;
    int slot_numbers = 0;    // dynamic slot numbers visited
    int idle_slots = 0;      // visited without a message
    int consumed = 0;        // minislots used
    int length_sum = 0;      // minislots carrying messages
    bool overflow = false;   // some pending message did not fit
    std::vector<Transmission> transmitted;
    std::vector<int> static_senders;  // apps using their static slot
};

struct SwitchEvent {
    long k = 0;  // k_p, the sample whose error triggered the switch
    Mode to = Mode::ET;
    int p = 1;   // 1-based event index; odd = TT->ET, even = ET->TT

    [[nodiscard]] long k_prime() const noexcept { return k + 1; }
};

/// Alternating, strictly increasing switch record of one application. The
/// protocol starts in TT (p = 0).
class SwitchLog {
public:
    /// Throws std::logic_error on a non-alternating direction or a
    /// non-increasing k.
    const SwitchEvent& record(long k, Mode to);

    [[nodiscard]] const std::vector<SwitchEvent>& events() const noexcept { return events_; }
    [[nodiscard]] std::size_t size() const noexcept { return events_.size(); }
    [[nodiscard]] Mode current() const noexcept { return events_.empty() ? Mode::TT : events_.back().to; }

private:
    std::vector<SwitchEvent> events_;
};

class Bus {
public:
    explicit Bus(BusConfig config);

    [[nodiscard]] const BusConfig& config() const noexcept { return config_; }
    [[nodiscard]] long cycle() const noexcept { return cycle_; }
    [[nodiscard]] std::size_t pending(int app) const;

    /// Queues the control message of `app` computed at sample k. TT messages
    /// use the static slot of the current cycle; ET messages join the app's
    /// dynamic queue. The returned delivery uses the nominal delay.
    Delivery transmit(int app, Mode mode, long k);

    /// Resolves cycle k: static senders, then dynamic slot numbers in priority
    /// order within the minislot budget. Unsent messages carry over. Throws
    /// BusInfeasibleError when a message would exceed d2.
    MinislotReport advance_cycle(long k);

    [[nodiscard]] const std::vector<MinislotReport>& log() const noexcept { return log_; }

private:
    BusConfig config_;
    std::vector<int> priority_order_;
    std::vector<std::deque<Transmission>> queues_;
    std::vector<int> static_requests_;
    std::vector<MinislotReport> log_;
    long cycle_ = 0;
};

}  // namespace adaptswitch
