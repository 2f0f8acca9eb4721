#include "adaptswitch/plant.hpp"

#include "adaptswitch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace adaptswitch {

namespace {

constexpr double kDivergenceLimit = 1e12;

}  // namespace

ShiftPolynomial PlantModel::A() const {
    std::vector<double> c{1.0};
    c.insert(c.end(), a.begin(), a.end());
    return ShiftPolynomial(std::move(c));
}

ShiftPolynomial PlantModel::B() const {
    if (b.empty()) {
        throw ConfigError("plant: b must contain at least b0");
    }
    return ShiftPolynomial(b);
}

void PlantModel::validate() const {
    if (b.empty() || b[0] == 0.0) {
        throw ConfigError("plant: b0 must be non-zero");
    }
    if (delay < 1) {
        throw ConfigError("plant: delay must be >= 1");
    }
    for (double c : a) {
        if (!std::isfinite(c)) throw ConfigError("plant: non-finite a coefficient");
    }
    for (double c : b) {
        if (!std::isfinite(c)) throw ConfigError("plant: non-finite b coefficient");
    }
    for (const auto& z : forward_roots(B())) {
        if (!(std::abs(z) < 1.0 - 1e-9)) {
            std::ostringstream os;
            os << "minimum-phase assumption violated: zero of B at " << z.real();
            if (z.imag() != 0.0) {
                os << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
            }
            os << " with |z| = " << std::abs(z) << " is not strictly inside the unit disk";
            throw ConfigError(os.str());
        }
    }
}

SignalHistory::SignalHistory(std::size_t y_depth, std::size_t u_depth, const InitialConditions& ic)
    : y_(std::max<std::size_t>(y_depth, 1)), u_(std::max<std::size_t>(u_depth, 1)) {
    // Oldest first so that lag 0 ends up at y(0) / u(-1).
    for (std::size_t lag = y_.capacity(); lag-- > 0;) {
        y_.push(lag < ic.y0.size() ? ic.y0[lag] : 0.0);
    }
    for (std::size_t i = u_.capacity(); i >= 1; --i) {
        u_.push(i - 1 < ic.u0.size() ? ic.u0[i - 1] : 0.0);
    }
}

SignalHistory SignalHistory::for_plant(const PlantModel& model, int d_max, const InitialConditions& ic) {
    const int d = std::max(d_max, model.delay);
    return SignalHistory(static_cast<std::size_t>(std::max(model.m1(), 1) + d + 1),
                         static_cast<std::size_t>(model.m2() + 2 * d + 1), ic);
}

double SignalHistory::y(long j) const {
    const long lag = k_ - j;
    if (lag < 0 || lag >= static_cast<long>(y_.capacity())) {
        throw std::out_of_range("SignalHistory: y(" + std::to_string(j) + ") outside retained window at k=" +
                                std::to_string(k_));
    }
    return y_[static_cast<std::size_t>(lag)];
}

double SignalHistory::u(long j) const {
    const long lag = k_ - 1 - j;
    if (lag < 0 || lag >= static_cast<long>(u_.capacity())) {
        throw std::out_of_range("SignalHistory: u(" + std::to_string(j) + ") outside retained window at k=" +
                                std::to_string(k_));
    }
    return u_[static_cast<std::size_t>(lag)];
}

void SignalHistory::push(double u_k, double y_next) {
    u_.push(u_k);
    y_.push(y_next);
    ++k_;
}

DisturbanceTrain::DisturbanceTrain(std::vector<long> times, std::vector<double> amplitudes, long tdw)
    : times_(std::move(times)), amplitudes_(std::move(amplitudes)), tdw_(tdw) {
    if (tdw_ < 1) {
        throw std::invalid_argument("DisturbanceTrain: T_dw must be >= 1");
    }
    if (times_.size() != amplitudes_.size()) {
        throw std::invalid_argument("DisturbanceTrain: times and amplitudes differ in length");
    }
    for (std::size_t i = 0; i < times_.size(); ++i) {
        if (!std::isfinite(amplitudes_[i])) {
            throw std::invalid_argument("DisturbanceTrain: non-finite amplitude");
        }
        if (i > 0 && times_[i] - times_[i - 1] < tdw_) {
            throw std::invalid_argument("DisturbanceTrain: impulses at " + std::to_string(times_[i - 1]) +
                                        " and " + std::to_string(times_[i]) + " are closer than T_dw = " +
                                        std::to_string(tdw_));
        }
    }
}

long DisturbanceTrain::min_gap() const noexcept {
    long gap = 0;
    for (std::size_t i = 1; i < times_.size(); ++i) {
        const long g = times_[i] - times_[i - 1];
        gap = (i == 1) ? g : std::min(gap, g);
    }
    return gap;
}

double DisturbanceTrain::at(long k) const noexcept {
    const auto it = std::lower_bound(times_.begin(), times_.end(), k);
    if (it == times_.end() || *it != k) {
        return 0.0;
    }
    return amplitudes_[static_cast<std::size_t>(it - times_.begin())];
}

DisturbanceTrain make_impulse_train(long tdw, std::vector<long> times, const std::vector<double>& amplitudes) {
    if (!times.empty() && amplitudes.empty()) {
        throw std::invalid_argument("make_impulse_train: no amplitudes given");
    }
    std::vector<double> amps(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        amps[i] = amplitudes[i % amplitudes.size()];
    }
    return DisturbanceTrain(std::move(times), std::move(amps), tdw);
}

DisturbanceTrain make_random_impulse_train(long tdw, long horizon, const std::vector<double>& amplitudes,
                                           std::uint64_t seed) {
    if (tdw < 1) {
        throw std::invalid_argument("make_random_impulse_train: T_dw must be >= 1");
    }
    std::mt19937_64 rng(seed);
    const auto span = static_cast<std::uint64_t>(tdw);
    std::vector<long> times;
    for (long t = static_cast<long>(rng() % span); t < horizon;
         t += tdw + static_cast<long>(rng() % span)) {
        times.push_back(t);
    }
    return make_impulse_train(tdw, std::move(times), amplitudes);
}

double step_difference(const PlantModel& model, SignalHistory& history, double u_k, const DisturbanceTrain& D) {
    const long k = history.k();
    const int d = model.delay;
    double y_next = 0.0;
    for (int l = 1; l <= model.m1(); ++l) {
        y_next -= model.a[static_cast<std::size_t>(l) - 1] * history.y(k + 1 - l);
    }
    for (int l = 0; l <= model.m2(); ++l) {
        const long j = k + 1 - l - d;
        y_next += model.b[static_cast<std::size_t>(l)] * (j == k ? u_k : history.u(j));
    }
    y_next += D.at(k + 1 - d);
    if (!std::isfinite(y_next) || std::abs(y_next) > kDivergenceLimit) {
        throw DivergenceError("plant output diverged at k=" + std::to_string(k + 1) + " (y=" +
                              std::to_string(y_next) + ")");
    }
    history.push(u_k, y_next);
    return y_next;
}

double step_predictor(const ShiftPolynomial& alpha, const ShiftPolynomial& beta, const SignalHistory& history,
                      double u_k, double D_term) {
    const long k = history.k();
    double y = D_term + beta.coeffs()[0] * u_k;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha.coeffs()[i] != 0.0) {
            y += alpha.coeffs()[i] * history.y(k - static_cast<long>(i));
        }
    }
    for (std::size_t j = 1; j < beta.size(); ++j) {
        y += beta.coeffs()[j] * history.u(k - static_cast<long>(j));
    }
    if (!std::isfinite(y)) {
        throw DivergenceError("predictor output is not finite at k=" + std::to_string(k));
    }
    return y;
}

double predictor_disturbance(const ShiftPolynomial& F, const DisturbanceTrain& D, long k) {
    double s = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j) {
        s += F.coeffs()[j] * D.at(k - static_cast<long>(j));
    }
    return s;
}

PredictorPlant::PredictorPlant(const PlantModel& model, int d)
    : coeffs_(predictor_coeffs(model.A(), model.B(), d)),
      history_(SignalHistory::for_plant(model, d)),
      pending_(static_cast<std::size_t>(d - 1), 0.0) {}

double PredictorPlant::step(double u_k, const DisturbanceTrain& D) {
    const long k = history_.k();
    const double y_ahead = step_predictor(coeffs_.alpha, coeffs_.beta, history_, u_k,
                                          predictor_disturbance(coeffs_.F, D, k));
    pending_.push_back(y_ahead);
    const double y_next = pending_.front();
    pending_.pop_front();
    history_.push(u_k, y_next);
    return y_next;
}

}  // namespace adaptswitch
