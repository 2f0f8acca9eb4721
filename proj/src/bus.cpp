#include "adaptswitch/bus.hpp"

#include "adaptswitch/errors.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

namespace adaptswitch {

std::string_view to_string(Mode m) noexcept { return m == Mode::TT ? "TT" : "ET"; }

Mode select_mode(double e, double eth) {
    if (!(eth > 0.0)) {
        throw std::invalid_argument("select_mode: threshold must be positive");
    }
    return std::abs(e) <= eth ? Mode::ET : Mode::TT;
}

void BusConfig::validate() const {
    if (d2 < 2) throw ConfigError("bus: d2 must be >= 2 (got " + std::to_string(d2) + ")");
    if (minislots_per_cycle < 0) throw ConfigError("bus: minislots_per_cycle must be >= 0");
    std::set<int> slots;
    std::set<int> priorities;
    for (std::size_t i = 0; i < apps.size(); ++i) {
        const auto& a = apps[i];
        const std::string who = "bus: application " + std::to_string(i);
        if (!(a.eth > 0.0)) throw ConfigError(who + ": eth must be > 0");
        if (a.message_length < 1) throw ConfigError(who + ": message_length must be >= 1");
        if (!slots.insert(a.static_slot).second) throw ConfigError(who + ": static slot already assigned");
        if (!priorities.insert(a.dyn_priority).second) throw ConfigError(who + ": dynamic priority already assigned");
    }
}

const SwitchEvent& SwitchLog::record(long k, Mode to) {
    if (to == current()) {
        throw std::logic_error("SwitchLog: direction does not alternate at k=" + std::to_string(k));
    }
    if (!events_.empty() && k <= events_.back().k) {
        throw std::logic_error("SwitchLog: switching instants must be strictly increasing");
    }
    events_.push_back({k, to, static_cast<int>(events_.size()) + 1});
    return events_.back();
}

Bus::Bus(BusConfig config)
    : config_(std::move(config)),
      priority_order_(static_cast<std::size_t>(config_.n_apps())),
      queues_(static_cast<std::size_t>(config_.n_apps())) {
    config_.validate();
    std::iota(priority_order_.begin(), priority_order_.end(), 0);
    std::sort(priority_order_.begin(), priority_order_.end(), [&](int a, int b) {
        return config_.apps[static_cast<std::size_t>(a)].dyn_priority <
               config_.apps[static_cast<std::size_t>(b)].dyn_priority;
    });
}

std::size_t Bus::pending(int app) const { return queues_.at(static_cast<std::size_t>(app)).size(); }

Delivery Bus::transmit(int app, Mode mode, long k) {
    if (app < 0 || app >= config_.n_apps()) {
        throw std::out_of_range("Bus::transmit: unknown application " + std::to_string(app));
    }
    if (k != cycle_) {
        throw std::logic_error("Bus::transmit: sample " + std::to_string(k) + " is not the open cycle " +
                               std::to_string(cycle_));
    }
    if (mode == Mode::TT) {
        static_requests_.push_back(app);
        return {Mode::TT, k, k + 1, 1};
    }
    const auto& ac = config_.apps[static_cast<std::size_t>(app)];
    queues_[static_cast<std::size_t>(app)].push_back({app, k, -1, ac.message_length});
    return {Mode::ET, k, k + config_.d2, config_.d2};
}

MinislotReport Bus::advance_cycle(long k) {
    if (k != cycle_) {
        throw std::logic_error("Bus::advance_cycle: cycles must be advanced in order");
    }
    MinislotReport r;
    r.cycle = k;
    r.static_senders = std::move(static_requests_);
    static_requests_.clear();
    std::sort(r.static_senders.begin(), r.static_senders.end());

    int budget = config_.minislots_per_cycle;
    for (int app : priority_order_) {
        if (budget <= 0) break;
        auto& q = queues_[static_cast<std::size_t>(app)];
        ++r.slot_numbers;
        if (!q.empty() && q.front().length <= budget) {
            Transmission t = q.front();
            q.pop_front();
            t.delivery_cycle = k;
            budget -= t.length;
            r.consumed += t.length;
            r.length_sum += t.length;
            r.transmitted.push_back(t);
        } else {
            if (!q.empty()) r.overflow = true;
            budget -= 1;
            r.consumed += 1;
            ++r.idle_slots;
        }
    }
    for (int app : priority_order_) {
        const auto& q = queues_[static_cast<std::size_t>(app)];
        if (!q.empty()) {
            r.overflow = true;
            if (k - q.front().submit_cycle + 1 >= config_.d2) {
                throw BusInfeasibleError(app, "bus: ET message of application " + std::to_string(app) +
                                                  " submitted at sample " + std::to_string(q.front().submit_cycle) +
                                                  " cannot be delivered within d2 = " +
                                                  std::to_string(config_.d2) + " samples");
            }
        }
    }
    log_.push_back(r);
    ++cycle_;
    return r;
}

}  // namespace adaptswitch
