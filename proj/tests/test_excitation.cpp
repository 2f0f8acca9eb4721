#include "adaptswitch/adaptive.hpp"
#include "adaptswitch/excitation.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace adaptswitch;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<double> sinusoid(std::size_t len, double w, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(len);
    for (std::size_t t = 0; t < len; ++t) x[t] = amp * std::sin(w * static_cast<double>(t) + phase);
    return x;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double s : v) x(i++) = s;
    return x;
}

// Rank oracle from the raw sample matrix: singular values squared against the
// same relative threshold.
int svd_rank(const std::vector<Eigen::VectorXd>& samples, double tol) {
    Eigen::MatrixXd X(samples.front().size(), static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) X.col(static_cast<Eigen::Index>(i)) = samples[i];
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto s2 = svd.singularValues().array().square().eval();
    if (s2(0) <= 0.0) return 0;
    return static_cast<int>((s2 > tol * s2(0)).count());
}

}  // namespace

TEST_CASE("numerical_rank examples", "[excitation]") {
    CHECK(numerical_rank(Eigen::MatrixXd::Identity(3, 3), 1e-8) == 3);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1e-12;
    CHECK(numerical_rank(d, 1e-8) == 1);
    CHECK(numerical_rank(Eigen::MatrixXd::Zero(3, 3), 1e-8) == 0);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(numerical_rank(asym), std::invalid_argument);
}

TEST_CASE("is_pe examples", "[excitation]") {
    std::vector<Eigen::VectorXd> ones(10, vec({1.0}));
    CHECK(is_pe(ones, 2, 2.0));
    CHECK_FALSE(is_pe(ones, 2, 2.0 + 1e-9));

    std::vector<Eigen::VectorXd> alt;
    for (int t = 0; t < 10; ++t) alt.push_back(t % 2 == 0 ? vec({1.0, 0.0}) : vec({0.0, 1.0}));
    CHECK(is_pe(alt, 2, 1.0));

    std::vector<Eigen::VectorXd> diag(10, vec({1.0, 1.0}));
    CHECK_FALSE(is_pe(diag, 2, 1e-6));
    CHECK_FALSE(is_pe(diag, 7, 1e-6));
}

TEST_CASE("sr_order examples", "[excitation]") {
    CHECK(sr_order(std::vector<double>(200, 0.0), 6, 40) == 0);
    CHECK(sr_order(std::vector<double>(200, 2.5), 6, 40) == 1);
    for (double w : {0.1, 0.7, 1.3, 2.9}) {
        INFO("omega " << w);
        CHECK(sr_order(sinusoid(400, w), 6, 80) == 2);
    }
}

TEST_CASE("sinusoid sums reach order 2k", "[excitation][property]") {
    std::mt19937_64 rng(12);
    for (int k = 1; k <= 3; ++k) {
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> x(600, 0.0);
            for (int c = 0; c < k; ++c) {
                const double w = 0.3 + 0.8 * c + testsupport::uniform(rng, 0.0, 0.3);
                const auto s = sinusoid(x.size(), w, testsupport::uniform(rng, 0.5, 1.5),
                                        testsupport::uniform(rng, 0.0, 3.0));
                for (std::size_t t = 0; t < x.size(); ++t) x[t] += s[t];
            }
            const int order = sr_order(x, 2 * k + 2, 200);
            CHECK(order == 2 * k);
            // Monotone: every smaller order is also attained.
            for (int m = 1; m <= order; ++m) CHECK(sr_order(x, m, 200) == m);
        }
    }
}

TEST_CASE("summable perturbation leaves sr_order unchanged", "[excitation][property]") {
    auto x = sinusoid(500, 0.9, 1.0, 0.4);
    const int base = sr_order(x, 5, 100);
    for (std::size_t t = 0; t < x.size(); ++t) x[t] += std::pow(0.5, static_cast<double>(t));
    CHECK(base == 2);
    CHECK(sr_order(x, 5, 100) == base);
}

TEST_CASE("GramWindow accumulation", "[excitation]") {
    GramWindow w(2, 5);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 1000; ++t) {
        w.push(vec({testsupport::uniform(rng, -10, 10), testsupport::uniform(rng, -10, 10)}));
        CHECK((w.accum() - w.recompute()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(w.size() == std::min<std::size_t>(static_cast<std::size_t>(t) + 1, 5));
    }
    CHECK(w.full());
    CHECK_THROWS_AS(w.push(vec({1.0})), std::invalid_argument);
    GramWindow empty(2, 3);
    CHECK_THROWS_AS(subspace_basis(empty), std::invalid_argument);
}

TEST_CASE("subspace_basis examples", "[excitation]") {
    GramWindow line(2, 10);
    for (double s : {1.0, -2.0, 0.5, 3.0}) line.push(vec({s, 0.0}));
    const auto r = subspace_basis(line);
    CHECK(r.rank == 1);
    REQUIRE(r.basis.cols() == 1);
    CHECK_THAT(std::abs(r.basis(0, 0)), WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.basis(1, 0), WithinAbs(0.0, 1e-12));
    CHECK_THAT(r.alpha_hat, WithinAbs(1.0 + 4.0 + 0.25 + 9.0, 1e-12));

    GramWindow plane(2, 100);
    std::mt19937_64 rng(4);
    for (int t = 0; t < 100; ++t) plane.push(vec({testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, -1, 1)}));
    const auto r2 = subspace_basis(plane);
    CHECK(r2.rank == 2);
    CHECK((r2.basis.transpose() * r2.basis - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r2.singular_values[0] >= r2.singular_values[1]);
}

TEST_CASE("orthogonality_residual examples", "[excitation]") {
    std::vector<Eigen::VectorXd> window{vec({1.0, 0.0}), vec({0.0, 2.0})};
    CHECK(orthogonality_residual(vec({0.0, 0.0}), window) == 0.0);
    std::vector<Eigen::VectorXd> line{vec({1.0, 1.0}), vec({-2.0, -2.0})};
    CHECK(orthogonality_residual(vec({1.0, -1.0}), line) == 0.0);
    CHECK(orthogonality_residual(vec({1.0}), std::vector<Eigen::VectorXd>{vec({1.0})}) == 0.5);
    CHECK_THROWS_AS(orthogonality_residual(vec({1.0}), window), std::invalid_argument);
}

TEST_CASE("state Gram of reachable systems under a single sinusoid has rank 2", "[excitation][property]") {
    std::mt19937_64 rng(2718);
    const int n = 3;
    const std::size_t N = 8 * n;
    int systems = 0;
    while (systems < 10) {
        Eigen::MatrixXd A(n, n);
        for (int i = 0; i < n * n; ++i) A(i / n, i % n) = testsupport::uniform(rng, -1, 1);
        const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A).eigenvalues().cwiseAbs().maxCoeff();
        A *= testsupport::uniform(rng, 0.3, 0.8) / rho;
        Eigen::MatrixXd B(n, 1);
        for (int i = 0; i < n; ++i) B(i, 0) = testsupport::uniform(rng, -1, 1);
        if (reachability_rank(A, B) != n) continue;
        ++systems;

        const double w = testsupport::uniform(rng, 0.2, 2.8);
        const auto u = sinusoid(700, w);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        std::vector<Eigen::VectorXd> states;
        for (std::size_t t = 0; t < u.size(); ++t) {
            states.push_back(x);
            x = A * x + B * u[t];
        }
        const std::size_t t0 = 500;
        GramWindow gw(n, N);
        std::vector<Eigen::VectorXd> window;
        for (std::size_t t = t0 + n; t < t0 + n + N; ++t) {
            gw.push(states[t]);
            window.push_back(states[t]);
        }
        const int rank = subspace_basis(gw).rank;
        INFO("system " << systems << " omega " << w);
        CHECK(rank == 2);
        CHECK(rank == svd_rank(window, kDefaultRankTol));
    }
}

TEST_CASE("regressor of a converged adaptive loop spans two dimensions", "[excitation]") {
    const PlantModel model{{-1.2, 0.5}, {1.0, 0.5}, 1, 1.0};
    const RegressorLayout layout{2, 1, 1};
    Eigen::VectorXd init = Eigen::VectorXd::Zero(layout.dim());
    init(layout.nu_index()) = 1.0;
    AdaptiveController ctrl(layout, ParameterEstimate(init, 0.5));
    auto h = SignalHistory::for_plant(model, 1);
    GramWindow gw(layout.dim(), 8 * static_cast<std::size_t>(layout.dim()));
    for (long k = 0; k < 3000; ++k) {
        const double u = ctrl.step(h, std::sin(0.3 * static_cast<double>(k + 1)));
        if (k >= 3000 - static_cast<long>(gw.window_len())) gw.push(ctrl.last_regressor().Phi);
        step_difference(model, h, u, DisturbanceTrain{});
    }
    CHECK(subspace_basis(gw).rank == 2);
}
