#include "adaptswitch/shift_polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptswitch {

ShiftPolynomial::ShiftPolynomial() : coeffs_{0.0} {}

ShiftPolynomial::ShiftPolynomial(std::initializer_list<double> coeffs)
    : ShiftPolynomial(std::vector<double>(coeffs)) {}

ShiftPolynomial::ShiftPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) {
        throw std::invalid_argument("ShiftPolynomial: coefficient vector must be non-empty");
    }
}

ShiftPolynomial ShiftPolynomial::normalized() const {
    std::vector<double> c = coeffs_;
    while (c.size() > 1 && c.back() == 0.0) {
        c.pop_back();
    }
    return ShiftPolynomial(std::move(c));
}

ShiftPolynomial ShiftPolynomial::shifted(int d) const {
    if (d < 0) {
        throw std::invalid_argument("ShiftPolynomial::shifted: negative shift");
    }
    std::vector<double> c(static_cast<std::size_t>(d), 0.0);
    c.insert(c.end(), coeffs_.begin(), coeffs_.end());
    return ShiftPolynomial(std::move(c));
}

double ShiftPolynomial::max_abs() const noexcept {
    double m = 0.0;
    for (double c : coeffs_) {
        m = std::max(m, std::abs(c));
    }
    return m;
}

ShiftPolynomial poly_add(const ShiftPolynomial& p, const ShiftPolynomial& q) {
    std::vector<double> c(std::max(p.size(), q.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = p[i] + q[i];
    }
    return ShiftPolynomial(std::move(c));
}

ShiftPolynomial poly_sub(const ShiftPolynomial& p, const ShiftPolynomial& q) {
    std::vector<double> c(std::max(p.size(), q.size()));
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = p[i] - q[i];
    }
    return ShiftPolynomial(std::move(c));
}

ShiftPolynomial poly_mul(const ShiftPolynomial& p, const ShiftPolynomial& q) {
    std::vector<double> c(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            c[i + j] += p.coeffs()[i] * q.coeffs()[j];
        }
    }
    return ShiftPolynomial(std::move(c));
}

DiophantineSolution solve_diophantine(const ShiftPolynomial& A, int d) {
    if (d < 1) {
        throw std::invalid_argument("solve_diophantine: delay must be >= 1, got " + std::to_string(d));
    }
    if (A.coeffs()[0] != 1.0) {
        throw std::invalid_argument("solve_diophantine: A must be monic (A[0] = 1), got A[0] = " +
                                    std::to_string(A.coeffs()[0]));
    }
    const std::size_t m1 = A.size() - 1;
    const auto du = static_cast<std::size_t>(d);

    // Remainder of 1 / A after each division step; only indices < d + m1 can
    // ever be non-zero.
    std::vector<double> rem(du + m1, 0.0);
    rem[0] = 1.0;
    std::vector<double> f(du, 0.0);
    for (std::size_t j = 0; j < du; ++j) {
        f[j] = rem[j];
        for (std::size_t i = 0; i <= m1; ++i) {
            rem[j + i] -= f[j] * A.coeffs()[i];
        }
    }
    std::vector<double> alpha(std::max<std::size_t>(m1, 1), 0.0);
    for (std::size_t i = 0; i < m1; ++i) {
        alpha[i] = rem[du + i];
    }
    return {ShiftPolynomial(std::move(f)), ShiftPolynomial(std::move(alpha))};
}

ShiftPolynomial diophantine_residual(const ShiftPolynomial& A, const DiophantineSolution& sol, int d) {
    return sol.F * A + sol.alpha.shifted(d) - ShiftPolynomial{1.0};
}

PredictorCoefficients predictor_coeffs(const ShiftPolynomial& A, const ShiftPolynomial& B, int d) {
    if (B.coeffs()[0] == 0.0) {
        throw std::invalid_argument("predictor_coeffs: b0 must be non-zero");
    }
    auto [F, alpha] = solve_diophantine(A, d);
    ShiftPolynomial beta = F * B;
    return {std::move(F), std::move(alpha), std::move(beta)};
}

std::vector<std::complex<double>> forward_roots(const ShiftPolynomial& B) {
    const ShiftPolynomial b = B.normalized();
    const int m = b.degree();
    if (m <= 0) {
        return {};
    }
    const double b0 = b.coeffs()[0];
    if (b0 == 0.0) {
        throw std::invalid_argument("forward_roots: leading coefficient b0 is zero");
    }
    // Companion matrix of z^m + (b1/b0) z^(m-1) + ... + bm/b0.
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) {
        C(0, j) = -b.coeffs()[static_cast<std::size_t>(j) + 1] / b0;
    }
    for (int i = 1; i < m; ++i) {
        C(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(C, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("forward_roots: eigenvalue iteration did not converge");
    }
    std::vector<std::complex<double>> roots(es.eigenvalues().data(),
                                            es.eigenvalues().data() + m);
    return roots;
}

bool zeros_strictly_inside(const ShiftPolynomial& B, double margin) {
    for (const auto& z : forward_roots(B)) {
        if (!(std::abs(z) < 1.0 - margin)) {
            return false;
        }
    }
    return true;
}

}  // namespace adaptswitch
