#include "adaptswitch/excitation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adaptswitch {

namespace {

constexpr std::size_t kResyncInterval = 4096;

Eigen::VectorXd stack(const std::vector<Eigen::VectorXd>& x, std::size_t t, int m) {
    const auto n = x[t].size();
    Eigen::VectorXd xi(n * m);
    for (int i = 0; i < m; ++i) {
        xi.segment(i * n, n) = x[t + static_cast<std::size_t>(i)];
    }
    return xi;
}

template <typename Range>
double residual_over(const Eigen::VectorXd& theta_err, const Range& window) {
    double worst = 0.0;
    for (const auto& phi : window) {
        if (phi.size() != theta_err.size()) {
            throw std::invalid_argument("orthogonality_residual: dimension mismatch");
        }
        worst = std::max(worst, std::abs(phi.dot(theta_err)) / (1.0 + phi.norm()));
    }
    return worst;
}

// Smallest lambda_min / lambda_max over every length-N window of the
// m-stacked sequence (0 when some window is identically zero).
double worst_relative_lambda(const std::vector<Eigen::VectorXd>& x, int m, std::size_t N) {
    const std::size_t count = x.size() - static_cast<std::size_t>(m) + 1;
    std::vector<Eigen::VectorXd> xi;
    xi.reserve(count);
    for (std::size_t t = 0; t < count; ++t) xi.push_back(stack(x, t, m));

    double worst = 1.0;
    const auto dim = xi.front().size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::size_t t0 = 0; t0 + N <= count; ++t0) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t t = t0; t < t0 + N; ++t) g.selfadjointView<Eigen::Lower>().rankUpdate(xi[t]);
        es.compute(g, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        if (lmax <= 0.0) return 0.0;
        worst = std::min(worst, es.eigenvalues().minCoeff() / lmax);
    }
    return worst;
}

}  // namespace

GramWindow::GramWindow(int n, std::size_t window_len)
    : n_(n), window_len_(window_len), accum_(Eigen::MatrixXd::Zero(n, n)) {
    if (n < 1 || window_len < 1) {
        throw std::invalid_argument("GramWindow: dimension and window length must be positive");
    }
}

void GramWindow::push(const Eigen::VectorXd& x) {
    if (x.size() != n_) {
        throw std::invalid_argument("GramWindow: sample dimension mismatch");
    }
    if (samples_.size() == window_len_) {
        accum_.noalias() -= samples_.front() * samples_.front().transpose();
        samples_.pop_front();
    }
    accum_.noalias() += x * x.transpose();
    samples_.push_back(x);
    if (++pushes_since_resync_ >= kResyncInterval) {
        resync();
        pushes_since_resync_ = 0;
    }
}

void GramWindow::clear() {
    samples_.clear();
    accum_.setZero();
    pushes_since_resync_ = 0;
}

Eigen::MatrixXd GramWindow::recompute() const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_, n_);
    for (const auto& x : samples_) g.noalias() += x * x.transpose();
    return g;
}

int numerical_rank(const Eigen::MatrixXd& m, double tol) {
    return analyze_gram(m, tol).rank;
}

ExcitationReport analyze_gram(const Eigen::MatrixXd& gram, double tol) {
    if (gram.rows() != gram.cols()) {
        throw std::invalid_argument("numerical_rank: matrix is not square");
    }
    const double scale = std::max(1.0, gram.cwiseAbs().maxCoeff());
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("numerical_rank: matrix is not symmetric");
    }
    ExcitationReport r;
    const auto n = gram.rows();
    r.basis = Eigen::MatrixXd(n, 0);
    if (n == 0) return r;

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    r.singular_values.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) r.singular_values[static_cast<std::size_t>(i)] = ev(n - 1 - i);

    const double lmax = ev(n - 1);
    if (!(lmax > 0.0)) return r;
    for (const double v : r.singular_values) {
        if (v > tol * lmax) ++r.rank;
    }
    r.alpha_hat = r.singular_values[static_cast<std::size_t>(r.rank) - 1];
    r.basis = es.eigenvectors().rightCols(r.rank).rowwise().reverse();
    return r;
}

ExcitationReport subspace_basis(const GramWindow& window, double tol) {
    if (window.size() == 0) {
        throw std::invalid_argument("subspace_basis: empty window");
    }
    return analyze_gram(window.accum(), tol);
}

bool is_pe(const std::vector<Eigen::VectorXd>& samples, std::size_t N, double alpha) {
    if (N == 0 || samples.size() < N) {
        throw std::invalid_argument("is_pe: sequence shorter than the window");
    }
    const auto n = samples.front().size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    for (std::size_t t0 = 0; t0 + N <= samples.size(); ++t0) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t t = t0; t < t0 + N; ++t) g.noalias() += samples[t] * samples[t].transpose();
        es.compute(g, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < alpha) return false;
    }
    return true;
}

int sr_order(const std::vector<Eigen::VectorXd>& x, int m_max, std::size_t N, double tol) {
    if (N == 0) {
        throw std::invalid_argument("sr_order: window must be positive");
    }
    int order = 0;
    for (int m = 1; m <= m_max; ++m) {
        if (x.size() < static_cast<std::size_t>(m) - 1 + N) {
            throw std::invalid_argument("sr_order: sequence too short for the requested order");
        }
        if (!(worst_relative_lambda(x, m, N) > tol)) break;
        order = m;
    }
    return order;
}

int sr_order(const std::vector<double>& x, int m_max, std::size_t N, double tol) {
    std::vector<Eigen::VectorXd> v;
    v.reserve(x.size());
    for (double s : x) v.push_back(Eigen::VectorXd::Constant(1, s));
    return sr_order(v, m_max, N, tol);
}

double orthogonality_residual(const Eigen::VectorXd& theta_err, const std::deque<Eigen::VectorXd>& window) {
    return residual_over(theta_err, window);
}

double orthogonality_residual(const Eigen::VectorXd& theta_err, const std::vector<Eigen::VectorXd>& window) {
    return residual_over(theta_err, window);
}

int reachability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
    const auto n = A.rows();
    Eigen::MatrixXd C(n, n * B.cols());
    Eigen::MatrixXd block = B;
    for (Eigen::Index i = 0; i < n; ++i) {
        C.middleCols(i * B.cols(), B.cols()) = block;
        block = A * block;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    return static_cast<int>((s.array() > tol * s(0)).count());
}

}  // namespace adaptswitch
