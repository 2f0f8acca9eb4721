#pragma once

#include <stdexcept>
#include <string>

namespace adaptswitch {

/// Invalid scenario or model configuration (bad JSON, violated assumption).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulated signal left the representable range.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The event-triggered schedule cannot honour the worst-case delay d2.
class BusInfeasibleError : public std::runtime_error {
public:
    BusInfeasibleError(int app, const std::string& what)
        : std::runtime_error(what), app_(app) {}

    [[nodiscard]] int app() const noexcept { return app_; }

private:
    int app_;
};

}  // namespace adaptswitch
