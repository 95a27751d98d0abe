#include "bslab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bslab/error.hpp"
#include "bslab/tolerances.hpp"

namespace bslab {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorCode::InvalidArgument, op,
             "shape mismatch " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                 std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) fail(ErrorCode::InvalidArgument, "ComplexMatrix", "ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
}

cplx ComplexMatrix::trace() const {
    cplx t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

bool ComplexMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

ComplexMatrix ComplexMatrix::imag_part() const {
    ComplexMatrix out(rows_, cols_);
    const cplx half_i_inv{0.0, -0.5};  // 1 / (2i)
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(i, j) = ((*this)(i, j) - std::conj((*this)(j, i))) * half_i_inv;
    return out;
}

ComplexMatrix ComplexMatrix::real_part() const {
    ComplexMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return out;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
    require_same_shape(*this, other, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) fail(ErrorCode::InvalidArgument, "operator*", "inner dimension mismatch");
    ComplexMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

std::vector<cplx> operator*(const ComplexMatrix& a, std::span<const cplx> x) {
    if (a.cols() != x.size()) fail(ErrorCode::InvalidArgument, "operator*", "vector length mismatch");
    std::vector<cplx> y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        cplx acc{};
        auto arow = a.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) acc += arow[j] * x[j];
        y[i] = acc;
    }
    return y;
}

ComplexMatrix shifted(ComplexMatrix a, cplx shift) {
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) a(i, i) += shift;
    return a;
}

double frobenius_norm(const ComplexMatrix& a) {
    // scaled accumulation so that large entries do not overflow
    double scale = 0.0, ssq = 1.0;
    for (const auto& v : a.data()) {
        for (double part : {v.real(), v.imag()}) {
            if (part == 0.0) continue;
            const double ab = std::abs(part);
            if (scale < ab) {
                ssq = 1.0 + ssq * (scale / ab) * (scale / ab);
                scale = ab;
            } else {
                ssq += (ab / scale) * (ab / scale);
            }
        }
    }
    return scale * std::sqrt(ssq);
}

double max_abs(const ComplexMatrix& a) {
    double m = 0.0;
    for (const auto& v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double hermiticity_residual(const ComplexMatrix& a) {
    if (!a.square()) return std::numeric_limits<double>::infinity();
    double r = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j) r = std::max(r, std::abs(a(i, j) - std::conj(a(j, i))));
    return r;
}

// ---------------------------------------------------------------------------

ComplexMatrix LUFactor::lower() const {
    ComplexMatrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        l(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) l(i, j) = packed(i, j);
    }
    return l;
}

ComplexMatrix LUFactor::upper() const {
    ComplexMatrix u(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) u(i, j) = packed(i, j);
    return u;
}

ComplexMatrix LUFactor::permutation() const {
    ComplexMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, perm[i]) = 1.0;
    return p;
}

LUFactor lu_factor_unchecked(const ComplexMatrix& a) {
    if (!a.square() || a.rows() == 0) fail(ErrorCode::InvalidArgument, "lu_factor", "matrix must be square and non-empty");
    LUFactor lu;
    lu.n = a.rows();
    lu.packed = a;
    lu.perm.resize(lu.n);
    lu.norm_frobenius = frobenius_norm(a);
    for (std::size_t i = 0; i < lu.n; ++i) lu.perm[i] = i;
    lu.min_pivot = std::numeric_limits<double>::infinity();

    auto& m = lu.packed;
    const std::size_t n = lu.n;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(m(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (p != k) {
            auto rk = m.row(k);
            auto rp = m.row(p);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
            std::swap(lu.perm[k], lu.perm[p]);
            lu.perm_sign = -lu.perm_sign;
        }
        lu.min_pivot = std::min(lu.min_pivot, best);
        const cplx pivot = m(k, k);
        if (pivot == cplx{}) continue;
        const cplx inv = 1.0 / pivot;
        auto rk = m.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ri = m.row(i);
            const cplx factor = ri[k] * inv;
            ri[k] = factor;
            if (factor == cplx{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= factor * rk[j];
        }
    }
    return lu;
}

LUFactor lu_factor(const ComplexMatrix& a) {
    LUFactor lu = lu_factor_unchecked(a);
    const double floor = default_tolerances().singular_pivot * lu.norm_frobenius;
    if (!(lu.min_pivot >= floor) || lu.min_pivot == 0.0) {
        fail(ErrorCode::SingularMatrix, "lu_factor",
             "pivot modulus " + std::to_string(lu.min_pivot) + " below threshold " + std::to_string(floor));
    }
    return lu;
}

ComplexMatrix solve(const LUFactor& lu, const ComplexMatrix& b) {
    if (b.rows() != lu.n) fail(ErrorCode::InvalidArgument, "solve", "right-hand side row count mismatch");
    const std::size_t n = lu.n;
    const std::size_t m = b.cols();
    const auto& f = lu.packed;
    for (std::size_t k = 0; k < n; ++k)
        if (f(k, k) == cplx{}) fail(ErrorCode::SingularMatrix, "solve", "zero pivot at " + std::to_string(k));

    ComplexMatrix x(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = b.row(lu.perm[i]);
        std::copy(src.begin(), src.end(), x.row(i).begin());
    }
    // forward: L y = P b
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = x.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const cplx l = f(i, k);
            if (l == cplx{}) continue;
            auto xk = x.row(k);
            for (std::size_t j = 0; j < m; ++j) xi[j] -= l * xk[j];
        }
    }
    // backward: U x = y
    for (std::size_t ii = n; ii-- > 0;) {
        auto xi = x.row(ii);
        for (std::size_t k = ii + 1; k < n; ++k) {
            const cplx u = f(ii, k);
            if (u == cplx{}) continue;
            auto xk = x.row(k);
            for (std::size_t j = 0; j < m; ++j) xi[j] -= u * xk[j];
        }
        const cplx inv = 1.0 / f(ii, ii);
        for (std::size_t j = 0; j < m; ++j) xi[j] *= inv;
    }
    return x;
}

double wrap_phase(double angle) {
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(angle, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

cplx LogDet::value() const { return std::polar(std::exp(log_modulus), phase); }

LogDet log_det(const LUFactor& lu) {
    LogDet out;
    double phase = lu.perm_sign < 0 ? std::numbers::pi : 0.0;
    for (std::size_t k = 0; k < lu.n; ++k) {
        const cplx p = lu.packed(k, k);
        if (p == cplx{}) fail(ErrorCode::SingularMatrix, "log_det", "zero pivot at " + std::to_string(k));
        out.log_modulus += std::log(std::abs(p));
        phase += std::arg(p);
    }
    out.phase = wrap_phase(phase);
    return out;
}

// ---------------------------------------------------------------------------

namespace {

/// Householder vector v (unit) and alpha such that (I - 2vv*) x = alpha e1.
/// Returns false when x is already zero below its first entry.
bool householder(std::span<const cplx> x, std::vector<cplx>& v, cplx& alpha) {
    double sigma2 = 0.0;
    for (const auto& xi : x) sigma2 += std::norm(xi);
    double tail = sigma2 - std::norm(x[0]);
    if (tail <= 0.0) return false;
    const double sigma = std::sqrt(sigma2);
    const double a0 = std::abs(x[0]);
    const cplx phase = a0 > 0.0 ? x[0] / a0 : cplx{1.0, 0.0};
    alpha = -phase * sigma;
    v.assign(x.begin(), x.end());
    v[0] -= alpha;
    double vn = 0.0;
    for (const auto& vi : v) vn += std::norm(vi);
    vn = std::sqrt(vn);
    if (vn == 0.0) return false;
    for (auto& vi : v) vi /= vn;
    return true;
}

}  // namespace

HermitianEig hermitian_eig(const ComplexMatrix& h) {
    const auto& tol = default_tolerances();
    if (!h.square() || h.rows() == 0) fail(ErrorCode::NotHermitian, "hermitian_eig", "matrix must be square and non-empty");
    const std::size_t n = h.rows();
    const double hnorm = frobenius_norm(h);
    {
        double resid2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) resid2 += std::norm(h(i, j) - std::conj(h(j, i)));
        if (std::sqrt(resid2) > tol.hermitian * hnorm) {
            fail(ErrorCode::NotHermitian, "hermitian_eig",
                 "||H - H*||_F = " + std::to_string(std::sqrt(resid2)) + " exceeds tolerance");
        }
    }

    ComplexMatrix a = h;
    ComplexMatrix q = ComplexMatrix::identity(n);
    std::vector<cplx> x, v, p;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t m = n - k - 1;
        x.resize(m);
        for (std::size_t i = 0; i < m; ++i) x[i] = a(k + 1 + i, k);
        cplx alpha;
        if (!householder(x, v, alpha)) continue;

        // trailing block B <- H B H with H = I - 2vv*
        p.assign(m, cplx{});
        for (std::size_t i = 0; i < m; ++i) {
            cplx acc{};
            for (std::size_t j = 0; j < m; ++j) acc += a(k + 1 + i, k + 1 + j) * v[j];
            p[i] = acc;
        }
        cplx kappa{};
        for (std::size_t i = 0; i < m; ++i) kappa += std::conj(v[i]) * p[i];
        const double kr = kappa.real();
        for (std::size_t i = 0; i < m; ++i) p[i] -= kr * v[i];  // w = p - (v*p) v
        for (std::size_t i = 0; i < m; ++i) {
            auto row = a.row(k + 1 + i);
            const cplx vi = v[i], wi = p[i];
            for (std::size_t j = 0; j < m; ++j)
                row[k + 1 + j] -= 2.0 * (vi * std::conj(p[j]) + wi * std::conj(v[j]));
        }
        a(k + 1, k) = alpha;
        a(k, k + 1) = std::conj(alpha);
        for (std::size_t i = 1; i < m; ++i) {
            a(k + 1 + i, k) = 0.0;
            a(k, k + 1 + i) = 0.0;
        }
        // Q <- Q H on columns k+1..
        for (std::size_t r = 0; r < n; ++r) {
            auto row = q.row(r);
            cplx s{};
            for (std::size_t j = 0; j < m; ++j) s += row[k + 1 + j] * v[j];
            s *= 2.0;
            for (std::size_t j = 0; j < m; ++j) row[k + 1 + j] -= s * std::conj(v[j]);
        }
    }

    // Make the tridiagonal real with a diagonal unitary scaling.
    std::vector<double> d(n), e(n, 0.0);
    std::vector<cplx> phase(n, cplx{1.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) d[i] = a(i, i).real();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const cplx b = a(i + 1, i);
        const double ab = std::abs(b);
        e[i] = ab;
        phase[i + 1] = ab > 0.0 ? phase[i] * (b / ab) : phase[i];
    }
    ComplexMatrix w = q;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) w(r, c) *= phase[c];

    // implicit-shift QL on (d, e), rotations applied to the columns of w
    const double eps = std::numeric_limits<double>::epsilon();
    double f = 0.0, tst1 = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n - 1) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > tol.eig_max_sweeps) {
                    fail(ErrorCode::NoConvergence, "hermitian_eig",
                         "QL iteration cap reached (dimension " + std::to_string(n) + ", off-diagonal residual " +
                             std::to_string(std::abs(e[l])) + ")");
                }
                double g = d[l];
                double pp = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(pp, 1.0);
                if (pp < 0) r = -r;
                d[l] = e[l] / (pp + r);
                d[l + 1] = e[l] * (pp + r);
                const double dl1 = d[l + 1];
                double hh = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= hh;
                f += hh;

                pp = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    hh = c * pp;
                    r = std::hypot(pp, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = pp / r;
                    pp = c * d[ii] - s * g;
                    d[ii + 1] = hh + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        const cplx t = w(k, ii + 1);
                        w(k, ii + 1) = s * w(k, ii) + c * t;
                        w(k, ii) = c * w(k, ii) - s * t;
                    }
                }
                pp = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * pp;
                d[l] = c * pp;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return d[i] < d[j]; });
    HermitianEig out;
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.eigenvalues[c] = d[order[c]];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = w(r, order[c]);
    }
    return out;
}

double operator_norm(const ComplexMatrix& a) {
    const auto& tol = default_tolerances();
    if (a.empty()) return 0.0;
    const std::size_t n = a.cols();
    std::vector<cplx> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = cplx{1.0 + 0.37 * static_cast<double>(i % 7), 0.11 * static_cast<double>(i % 5)};
    const ComplexMatrix ah = a.adjoint();
    double lambda = 0.0;
    for (int it = 0; it < tol.opnorm_max_iter; ++it) {
        double xn = 0.0;
        for (const auto& v : x) xn += std::norm(v);
        xn = std::sqrt(xn);
        if (xn == 0.0) return 0.0;
        for (auto& v : x) v /= xn;
        const auto y = ah * std::span<const cplx>(a * std::span<const cplx>(x));
        cplx rq{};
        for (std::size_t i = 0; i < n; ++i) rq += std::conj(x[i]) * y[i];
        const double next = rq.real();
        if (it > 2 && std::abs(next - lambda) <= 1e-4 * tol.opnorm_rel * std::abs(next)) {
            return std::sqrt(std::max(next, 0.0));
        }
        lambda = next;
        x = y;
    }
    // slow separation of the two leading singular values
    const auto eig = hermitian_eig(ah * a);
    return std::sqrt(std::max(eig.eigenvalues.back(), 0.0));
}

Norms norms(const ComplexMatrix& a) { return Norms{frobenius_norm(a), operator_norm(a)}; }

// ---------------------------------------------------------------------------

ComplexMatrix hessenberg_form(const ComplexMatrix& m) {
    if (!m.square()) fail(ErrorCode::InvalidArgument, "hessenberg_form", "matrix must be square");
    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    std::vector<cplx> x, v, tmp;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t len = n - k - 1;
        x.resize(len);
        for (std::size_t i = 0; i < len; ++i) x[i] = a(k + 1 + i, k);
        cplx alpha;
        if (!householder(x, v, alpha)) continue;
        // left: rows k+1.. <- H rows
        tmp.assign(n, cplx{});
        for (std::size_t i = 0; i < len; ++i) {
            const cplx vc = std::conj(v[i]);
            auto row = a.row(k + 1 + i);
            for (std::size_t j = k; j < n; ++j) tmp[j] += vc * row[j];
        }
        for (std::size_t i = 0; i < len; ++i) {
            auto row = a.row(k + 1 + i);
            const cplx vi = 2.0 * v[i];
            for (std::size_t j = k; j < n; ++j) row[j] -= vi * tmp[j];
        }
        // right: cols k+1.. <- cols H
        for (std::size_t r = 0; r < n; ++r) {
            auto row = a.row(r);
            cplx s{};
            for (std::size_t j = 0; j < len; ++j) s += row[k + 1 + j] * v[j];
            s *= 2.0;
            for (std::size_t j = 0; j < len; ++j) row[k + 1 + j] -= s * std::conj(v[j]);
        }
        a(k + 1, k) = alpha;
        for (std::size_t i = 1; i < len; ++i) a(k + 1 + i, k) = 0.0;
    }
    return a;
}

LogDet hessenberg_pencil_log_det(const ComplexMatrix& h, cplx s) {
    const std::size_t n = h.rows();
    std::vector<cplx> cur(n), next(n);
    LogDet out;
    double phase = 0.0;
    // row-by-row elimination keeping only the active pivot row
    for (std::size_t j = 0; j < n; ++j) cur[j] = s * h(0, j) + (j == 0 ? 1.0 : 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        if (k + 1 < n) {
            for (std::size_t j = 0; j < n; ++j) next[j] = s * h(k + 1, j) + (j == k + 1 ? 1.0 : 0.0);
            if (std::abs(next[k]) > std::abs(cur[k])) {
                std::swap(cur, next);
                phase += std::numbers::pi;
            }
        }
        const cplx pivot = cur[k];
        if (pivot == cplx{}) {
            out.log_modulus = -std::numeric_limits<double>::infinity();
            out.phase = 0.0;
            return out;
        }
        out.log_modulus += std::log(std::abs(pivot));
        phase += std::arg(pivot);
        if (k + 1 < n) {
            const cplx factor = next[k] / pivot;
            for (std::size_t j = k + 1; j < n; ++j) next[j] -= factor * cur[j];
            std::swap(cur, next);
        }
    }
    out.phase = wrap_phase(phase);
    return out;
}

}  // namespace bslab
