#pragma once

// Unknown-plant simulation: the difference form
//   y(k) = -sum a_l y(k-l) + b0 u(k-d) + sum b_l u(k-l-d) + D(k-d)
// and the equivalent d-step-ahead predictor form, plus the impulse-train
// disturbances with a minimum inter-arrival gap.

#include "adaptswitch/ring_buffer.hpp"
#include "adaptswitch/shift_polynomial.hpp"

#include <cstdint>
#include <deque>
#include <vector>

namespace adaptswitch {

struct PlantModel {
    std::vector<double> a;  // a_1..a_m1
    std::vector<double> b;  // b_0..b_m2
    int delay = 1;          // d >= 1, in samples
    double h = 1.0;         // sample period [s], metadata only

    [[nodiscard]] int m1() const noexcept { return static_cast<int>(a.size()); }
    [[nodiscard]] int m2() const noexcept { return static_cast<int>(b.size()) - 1; }
    [[nodiscard]] ShiftPolynomial A() const;
    [[nodiscard]] ShiftPolynomial B() const;

    /// Throws ConfigError when b0 = 0, d < 1, or a zero of B lies on or
    /// outside the unit circle (the message names the offending root).
    void validate() const;
};

/// Finite initial conditions: y0[i] = y(-i) for i = 0..m1-1 and
/// u0[i-1] = u(-i) for i = 1..m2+d-1. Missing entries default to zero.
struct InitialConditions {
    std::vector<double> y0;
    std::vector<double> u0;
};

/// Bounded past of one plant's output and (applied) input, indexed by
/// absolute sample number. y(k) is the newest output; u(k-1) the newest input.
class SignalHistory {
public:
    SignalHistory(std::size_t y_depth, std::size_t u_depth, const InitialConditions& ic = {});

    /// Depths sufficient for the plant's difference equation and for regressors
    /// of every delay up to d_max.
    static SignalHistory for_plant(const PlantModel& model, int d_max, const InitialConditions& ic = {});

    [[nodiscard]] long k() const noexcept { return k_; }
    [[nodiscard]] std::size_t y_depth() const noexcept { return y_.capacity(); }
    [[nodiscard]] std::size_t u_depth() const noexcept { return u_.capacity(); }

    /// y(j) for k - y_depth < j <= k; throws std::out_of_range otherwise.
    [[nodiscard]] double y(long j) const;
    /// u(j) for k - u_depth <= j <= k - 1; throws std::out_of_range otherwise.
    [[nodiscard]] double u(long j) const;

    /// Records u(k) and y(k+1), then advances k.
    void push(double u_k, double y_next);

private:
    RingBuffer<double> y_;
    RingBuffer<double> u_;
    long k_ = 0;
};

/// Impulses D(k) at strictly increasing sample indices, consecutive impulses
/// at least `tdw` samples apart.
class DisturbanceTrain {
public:
    DisturbanceTrain() = default;
    /// Throws std::invalid_argument when the gap invariant or finiteness fails.
    DisturbanceTrain(std::vector<long> times, std::vector<double> amplitudes, long tdw);

    [[nodiscard]] const std::vector<long>& times() const noexcept { return times_; }
    [[nodiscard]] const std::vector<double>& amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] long tdw() const noexcept { return tdw_; }
    [[nodiscard]] bool empty() const noexcept { return times_.empty(); }
    /// Smallest gap between consecutive impulses (0 with fewer than 2 impulses).
    [[nodiscard]] long min_gap() const noexcept;

    /// D(k); zero away from the impulse instants.
    [[nodiscard]] double at(long k) const noexcept;

private:
    std::vector<long> times_;
    std::vector<double> amplitudes_;
    long tdw_ = 1;
};

/// Impulses at explicit instants. `amplitudes` is cycled (one entry = constant).
[[nodiscard]] DisturbanceTrain make_impulse_train(long tdw, std::vector<long> times,
                                                  const std::vector<double>& amplitudes);

/// Impulses placed at random over [0, horizon): the first lands in [0, tdw),
/// each following one tdw + U[0, tdw) samples later. Reproducible for a seed.
[[nodiscard]] DisturbanceTrain make_random_impulse_train(long tdw, long horizon,
                                                         const std::vector<double>& amplitudes,
                                                         std::uint64_t seed);

/// Advances the difference form by one sample: consumes u(k) = u_k, returns
/// y(k+1) (with D entering as D(k+1-d)) and pushes both into the history.
/// Throws DivergenceError when y is non-finite or exceeds 1e12 in magnitude.
double step_difference(const PlantModel& model, SignalHistory& history, double u_k,
                       const DisturbanceTrain& D);

/// y(k+d) = alpha(q^-1) y(k) + beta(q^-1) u(k) + D_term evaluated from the
/// history at its current k; the history is not modified.
[[nodiscard]] double step_predictor(const ShiftPolynomial& alpha, const ShiftPolynomial& beta,
                                    const SignalHistory& history, double u_k, double D_term);

/// Disturbance seen by the d-step predictor at sample k: F(q^-1) D(k).
/// Equals D(k) when d = 1 (F = 1).
[[nodiscard]] double predictor_disturbance(const ShiftPolynomial& F, const DisturbanceTrain& D, long k);

/// A plant simulated purely through its predictor form. Outputs y(1)..y(d-1)
/// are seeded with zeros, which is exact for zero initial conditions.
class PredictorPlant {
public:
    PredictorPlant(const PlantModel& model, int d);

    [[nodiscard]] const SignalHistory& history() const noexcept { return history_; }
    [[nodiscard]] const PredictorCoefficients& coeffs() const noexcept { return coeffs_; }

    /// Applies u(k), computes y(k+d) and returns y(k+1).
    double step(double u_k, const DisturbanceTrain& D);

private:
    PredictorCoefficients coeffs_;
    SignalHistory history_;
    std::deque<double> pending_;  // y(k+1) .. y(k+d-1)
};

}  // namespace adaptswitch
