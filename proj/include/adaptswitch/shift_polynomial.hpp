#pragma once

// Polynomials in the backward-shift operator q^-1.
//
// Coefficient i multiplies q^-i, so {1, -0.5} is 1 - 0.5 q^-1. The plant
// denominator A, numerator B, the predictor pair (F, alpha) and beta = F*B are
// all stored this way.

#include <complex>
#include <initializer_list>
#include <vector>

namespace adaptswitch {

class ShiftPolynomial {
public:
    /// The zero polynomial (a single 0 coefficient).
    ShiftPolynomial();
    ShiftPolynomial(std::initializer_list<double> coeffs);
    explicit ShiftPolynomial(std::vector<double> coeffs);

    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return coeffs_; }
    [[nodiscard]] std::size_t size() const noexcept { return coeffs_.size(); }
    /// Degree of the stored representation (trailing zeros included).
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    /// Coefficient of q^-i, zero beyond the stored length.
    [[nodiscard]] double operator[](std::size_t i) const noexcept {
        return i < coeffs_.size() ? coeffs_[i] : 0.0;
    }

    /// Copy with trailing zero coefficients removed (at least one kept).
    [[nodiscard]] ShiftPolynomial normalized() const;

    /// Multiply by q^-d, i.e. prepend d zero coefficients.
    [[nodiscard]] ShiftPolynomial shifted(int d) const;

    /// Largest coefficient magnitude.
    [[nodiscard]] double max_abs() const noexcept;

    friend bool operator==(const ShiftPolynomial&, const ShiftPolynomial&) = default;

private:
    std::vector<double> coeffs_;
};

[[nodiscard]] ShiftPolynomial poly_add(const ShiftPolynomial& p, const ShiftPolynomial& q);
[[nodiscard]] ShiftPolynomial poly_sub(const ShiftPolynomial& p, const ShiftPolynomial& q);
[[nodiscard]] ShiftPolynomial poly_mul(const ShiftPolynomial& p, const ShiftPolynomial& q);

inline ShiftPolynomial operator+(const ShiftPolynomial& p, const ShiftPolynomial& q) { return poly_add(p, q); }
inline ShiftPolynomial operator-(const ShiftPolynomial& p, const ShiftPolynomial& q) { return poly_sub(p, q); }
inline ShiftPolynomial operator*(const ShiftPolynomial& p, const ShiftPolynomial& q) { return poly_mul(p, q); }

struct DiophantineSolution {
    ShiftPolynomial F;      // degree d-1, F[0] = 1
    ShiftPolynomial alpha;  // degree <= deg(A)-1; (0) when A = (1)
};

/// Solves 1 = F A + q^-d alpha for a monic A by d steps of long division of 1
/// by A. Throws std::invalid_argument for a non-monic A or d < 1.
[[nodiscard]] DiophantineSolution solve_diophantine(const ShiftPolynomial& A, int d);

/// Residual polynomial F A + q^-d alpha - 1 (all zeros for an exact solution).
[[nodiscard]] ShiftPolynomial diophantine_residual(const ShiftPolynomial& A,
                                                   const DiophantineSolution& sol, int d);

struct PredictorCoefficients {
    ShiftPolynomial F;
    ShiftPolynomial alpha;  // m1 coefficients, multiplies y(k)..y(k-m1+1)
    ShiftPolynomial beta;   // m2+d coefficients, multiplies u(k)..u(k-m2-d+1)
};

/// alpha and beta = F B of the d-step-ahead predictor
/// y(k+d) = alpha(q^-1) y(k) + beta(q^-1) u(k). Rejects b0 = 0.
[[nodiscard]] PredictorCoefficients predictor_coeffs(const ShiftPolynomial& A,
                                                     const ShiftPolynomial& B, int d);

/// Roots of the forward polynomial b0 z^m + b1 z^(m-1) + ... + bm, taken from
/// the eigenvalues of its companion matrix. B is normalized first.
[[nodiscard]] std::vector<std::complex<double>> forward_roots(const ShiftPolynomial& B);

/// True iff every zero of B has |z| < 1 - margin. Degree-0 B is vacuously true.
[[nodiscard]] bool zeros_strictly_inside(const ShiftPolynomial& B, double margin = 1e-9);

}  // namespace adaptswitch
