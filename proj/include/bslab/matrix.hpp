#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace bslab {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix diagonal(std::span<const double> d);
    static ComplexMatrix diagonal(std::span<const cplx> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const cplx> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    cplx trace() const;
    bool all_finite() const;

    /// (A - A*) / (2i): the Hermitian imaginary part.
    ComplexMatrix imag_part() const;
    ComplexMatrix real_part() const;

    ComplexMatrix& operator+=(const ComplexMatrix& other);
    ComplexMatrix& operator-=(const ComplexMatrix& other);
    ComplexMatrix& operator*=(cplx scale);

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(ComplexMatrix a, cplx s);
ComplexMatrix operator*(cplx s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<cplx> operator*(const ComplexMatrix& a, std::span<const cplx> x);

/// A + shift * I for square A.
ComplexMatrix shifted(ComplexMatrix a, cplx shift);

double frobenius_norm(const ComplexMatrix& a);
double max_abs(const ComplexMatrix& a);
/// max |A_ij - conj(A_ji)|; +inf for non-square input.
double hermiticity_residual(const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// LU with partial pivoting

struct LUFactor {
    std::size_t n = 0;
    ComplexMatrix packed;            // unit-lower L below the diagonal, U on and above
    std::vector<std::size_t> perm;   // row i of P*A is row perm[i] of A
    int perm_sign = 1;
    double min_pivot = 0.0;          // smallest |U_kk|
    double norm_frobenius = 0.0;     // ||A||_F of the factored matrix

    ComplexMatrix lower() const;
    ComplexMatrix upper() const;
    ComplexMatrix permutation() const;
};

/// Partial-pivoted LU. Throws SingularMatrix when a pivot modulus falls
/// below `singular_pivot * ||A||_F`.
LUFactor lu_factor(const ComplexMatrix& a);

/// Same factorization without the singularity check; exact zero pivots
/// are left in place.
LUFactor lu_factor_unchecked(const ComplexMatrix& a);

ComplexMatrix solve(const LUFactor& lu, const ComplexMatrix& b);

struct LogDet {
    double log_modulus = 0.0;
    double phase = 0.0;  // in (-pi, pi]

    cplx value() const;
};

LogDet log_det(const LUFactor& lu);

/// Maps an angle to (-pi, pi].
double wrap_phase(double angle);

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition

struct HermitianEig {
    std::vector<double> eigenvalues;  // ascending
    ComplexMatrix eigenvectors;       // columns
};

/// Householder tridiagonalization followed by implicit-shift QL.
/// Throws NotHermitian or NoConvergence.
HermitianEig hermitian_eig(const ComplexMatrix& h);

struct Norms {
    double frobenius = 0.0;
    double op = 0.0;
};

Norms norms(const ComplexMatrix& a);
double operator_norm(const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// Upper-Hessenberg reduction, used for repeated determinant evaluation of
// the pencil I + s*M at many complex s.

/// Unitary similarity M = Q H Q* with H upper Hessenberg.
ComplexMatrix hessenberg_form(const ComplexMatrix& m);

/// log det(I + s*H) for an upper-Hessenberg H in O(n^2). Returns
/// log_modulus = -inf when the pencil is exactly singular.
LogDet hessenberg_pencil_log_det(const ComplexMatrix& h, cplx s);

}  // namespace bslab
