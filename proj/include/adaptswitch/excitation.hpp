#pragma once

// Persistent excitation and sufficient richness analytics.

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <vector>

namespace adaptswitch {

/// Sliding sum of outer products over the most recent `window_len` samples.
class GramWindow {
public:
    GramWindow(int n, std::size_t window_len);

    void push(const Eigen::VectorXd& x);
    void clear();

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] std::size_t window_len() const noexcept { return window_len_; }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] bool full() const noexcept { return samples_.size() == window_len_; }
    [[nodiscard]] const std::deque<Eigen::VectorXd>& samples() const noexcept { return samples_; }

    /// Incrementally maintained sum.
    [[nodiscard]] const Eigen::MatrixXd& accum() const noexcept { return accum_; }
    /// Sum rebuilt from the retained samples.
    [[nodiscard]] Eigen::MatrixXd recompute() const;
    /// Replaces the running sum by recompute() to shed rounding drift.
    void resync() { accum_ = recompute(); }

private:
    int n_;
    std::size_t window_len_;
    std::deque<Eigen::VectorXd> samples_;
    Eigen::MatrixXd accum_;
    std::size_t pushes_since_resync_ = 0;
};

struct ExcitationReport {
    int rank = 0;
    std::vector<double> singular_values;  // Gram eigenvalues, descending
    double alpha_hat = 0.0;               // smallest eigenvalue counted in rank
    Eigen::MatrixXd basis;                // n x rank, orthonormal columns
};

inline constexpr double kDefaultRankTol = 1e-6;

/// Count of eigenvalues above tol * lambda_max. Throws std::invalid_argument
/// for a non-square or asymmetric matrix.
[[nodiscard]] int numerical_rank(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

/// Eigen-decomposition of a Gram matrix into an ExcitationReport.
[[nodiscard]] ExcitationReport analyze_gram(const Eigen::MatrixXd& gram, double tol = kDefaultRankTol);

/// Report for the window's current sum. Throws std::invalid_argument if empty.
[[nodiscard]] ExcitationReport subspace_basis(const GramWindow& window, double tol = kDefaultRankTol);

/// True iff every length-N window sum of x x' has lambda_min >= alpha.
[[nodiscard]] bool is_pe(const std::vector<Eigen::VectorXd>& samples, std::size_t N, double alpha);

/// Largest m <= m_max whose stacked vectors (x(t+1)..x(t+m)) have a window
/// Gram with lambda_min > tol * lambda_max over every length-N window. Scans
/// upward and stops at the first failure.
[[nodiscard]] int sr_order(const std::vector<double>& x, int m_max, std::size_t N, double tol = kDefaultRankTol);
[[nodiscard]] int sr_order(const std::vector<Eigen::VectorXd>& x, int m_max, std::size_t N,
                           double tol = kDefaultRankTol);

/// max |Phi' theta_err| / (1 + |Phi|) over the given regressors.
[[nodiscard]] double orthogonality_residual(const Eigen::VectorXd& theta_err,
                                            const std::deque<Eigen::VectorXd>& window);
[[nodiscard]] double orthogonality_residual(const Eigen::VectorXd& theta_err,
                                            const std::vector<Eigen::VectorXd>& window);

/// Rank of [B, AB, ..., A^(n-1)B] (singular values above tol * sigma_max).
[[nodiscard]] int reachability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-10);

}  // namespace adaptswitch
