#include "bslab/model.hpp"

#include <algorithm>
#include <cmath>

#include "bslab/error.hpp"
#include "bslab/tolerances.hpp"

namespace bslab {

namespace {

constexpr const char* kBuild = "build_model";

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
    fail(ErrorCode::InvalidConfig, kBuild, field + ": " + what);
}

void require_finite(const std::vector<double>& xs, const std::string& field) {
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (!std::isfinite(xs[i])) invalid(field + "[" + std::to_string(i) + "]", "not finite");
}

void require_hermitian(const ComplexMatrix& m, const std::string& field) {
    if (!m.square()) invalid(field, "must be square");
    if (!m.all_finite()) invalid(field, "entries must be finite");
    const double resid = hermiticity_residual(m);
    if (resid > default_tolerances().hermitian * (1.0 + max_abs(m))) {
        fail(ErrorCode::NonHermitianInput, kBuild, field + ": hermiticity residual " + std::to_string(resid));
    }
}

std::vector<double> signs_or_default(const ModelConfig& cfg, std::size_t n) {
    if (cfg.signs.empty()) return std::vector<double>(n, 1.0);
    if (cfg.signs.size() != n) invalid("signs", "length " + std::to_string(cfg.signs.size()) + " != dimension " + std::to_string(n));
    require_finite(cfg.signs, "signs");
    return cfg.signs;
}

/// Rows of norm `scale` orthogonal to f (and to each other), completing f* to
/// an invertible square rigging.
ComplexMatrix rank_one_rigging(const std::vector<cplx>& f, double scale) {
    const std::size_t n = f.size();
    ComplexMatrix rig(n, n);
    for (std::size_t j = 0; j < n; ++j) rig(0, j) = std::conj(f[j]);

    std::vector<std::vector<cplx>> basis;
    double fn = 0.0;
    for (const auto& v : f) fn += std::norm(v);
    fn = std::sqrt(fn);
    std::vector<cplx> fhat(n);
    for (std::size_t j = 0; j < n; ++j) fhat[j] = f[j] / fn;
    basis.push_back(fhat);

    for (std::size_t e = 0; e < n && basis.size() < n; ++e) {
        std::vector<cplx> q(n, cplx{});
        q[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                cplx proj{};
                for (std::size_t k = 0; k < n; ++k) proj += std::conj(b[k]) * q[k];
                for (std::size_t k = 0; k < n; ++k) q[k] -= proj * b[k];
            }
        }
        double qn = 0.0;
        for (const auto& v : q) qn += std::norm(v);
        qn = std::sqrt(qn);
        if (qn < 1e-8) continue;
        for (auto& v : q) v /= qn;
        basis.push_back(q);
    }
    for (std::size_t row = 1; row < n; ++row)
        for (std::size_t j = 0; j < n; ++j) rig(row, j) = scale * std::conj(basis[row][j]);
    return rig;
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Explicit: return "explicit";
        case ModelKind::Diagonal: return "diagonal";
        case ModelKind::Schrodinger1d: return "schrodinger1d";
        case ModelKind::Jacobi: return "jacobi";
        case ModelKind::RankOne: return "rank_one";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "explicit") return ModelKind::Explicit;
    if (name == "diagonal") return ModelKind::Diagonal;
    if (name == "schrodinger1d") return ModelKind::Schrodinger1d;
    if (name == "jacobi") return ModelKind::Jacobi;
    if (name == "rank_one") return ModelKind::RankOne;
    fail(ErrorCode::InvalidConfig, kBuild, "kind: unknown model kind '" + name + "'");
}

std::vector<double> rigging_weights(std::size_t n, double alpha) {
    std::vector<double> w(n);
    const double mid = 0.5 * static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) - mid;
        w[i] = std::pow(1.0 + x * x, -alpha);
    }
    return w;
}

OperatorModel::OperatorModel(ComplexMatrix h0, ComplexMatrix f, ComplexMatrix j, Interval interval, std::string label)
    : h0_(std::move(h0)), f_(std::move(f)), j_(std::move(j)), interval_(interval), label_(std::move(label)) {
    if (!h0_.square() || h0_.rows() == 0) fail(ErrorCode::InvalidConfig, "OperatorModel", "h0 must be square and non-empty");
    const std::size_t n = h0_.rows();
    if (f_.rows() != n || f_.cols() != n) fail(ErrorCode::InvalidConfig, "OperatorModel", "f must be square of the same dimension as h0");
    if (j_.rows() != n || j_.cols() != n) fail(ErrorCode::InvalidConfig, "OperatorModel", "j must be square of the same dimension as h0");
    f_adj_ = f_.adjoint();
    v_ = f_adj_ * (j_ * f_);
    v_ = v_.real_part();  // exact Hermitian symmetrization of rounding noise
}

OperatorModel build_model(const ModelConfig& cfg) {
    if (!(cfg.interval.a < cfg.interval.b)) invalid("interval", "requires a < b");
    const auto& tol = default_tolerances();

    switch (cfg.kind) {
        case ModelKind::Explicit: {
            if (!cfg.h0) invalid("h0", "required for explicit models");
            if (!cfg.f) invalid("f", "required for explicit models");
            if (!cfg.j) invalid("j", "required for explicit models");
            require_hermitian(*cfg.h0, "h0");
            require_hermitian(*cfg.j, "j");
            if (!cfg.f->all_finite()) invalid("f", "entries must be finite");
            if (cfg.f->rows() != cfg.h0->rows() || cfg.f->cols() != cfg.h0->rows()) invalid("f", "must match h0 dimension");
            if (cfg.j->rows() != cfg.h0->rows()) invalid("j", "must match h0 dimension");
            return OperatorModel(*cfg.h0, *cfg.f, *cfg.j, cfg.interval, "explicit");
        }
        case ModelKind::Diagonal: {
            if (cfg.spectrum.empty()) invalid("spectrum", "must be non-empty");
            require_finite(cfg.spectrum, "spectrum");
            const std::size_t n = cfg.spectrum.size();
            std::vector<double> w = cfg.weights.empty() ? std::vector<double>(n, 1.0) : cfg.weights;
            if (w.size() != n) invalid("weights", "length must match spectrum");
            require_finite(w, "weights");
            return OperatorModel(ComplexMatrix::diagonal(cfg.spectrum), ComplexMatrix::diagonal(w),
                                 ComplexMatrix::diagonal(signs_or_default(cfg, n)), cfg.interval, "diagonal");
        }
        case ModelKind::Schrodinger1d: {
            const std::size_t n = cfg.sites;
            if (n < 2) invalid("sites", "lattice size must be >= 2");
            std::vector<double> pot = cfg.potential;
            if (pot.empty()) {
                pot.resize(n);
                Rng rng(cfg.seed);
                for (auto& v : pot) v = cfg.disorder * (rng.uniform() - 0.5);
            }
            if (pot.size() != n) invalid("potential", "length " + std::to_string(pot.size()) + " != sites " + std::to_string(n));
            require_finite(pot, "potential");
            ComplexMatrix h0(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                h0(i, i) = 2.0 + pot[i];
                if (i + 1 < n) h0(i, i + 1) = h0(i + 1, i) = -1.0;
            }
            return OperatorModel(std::move(h0), ComplexMatrix::diagonal(rigging_weights(n, cfg.alpha)),
                                 ComplexMatrix::diagonal(signs_or_default(cfg, n)), cfg.interval, "schrodinger1d");
        }
        case ModelKind::Jacobi: {
            const std::size_t n = cfg.jacobi_diagonal.size();
            if (n == 0) invalid("jacobi_diagonal", "must be non-empty");
            if (cfg.jacobi_offdiagonal.size() + 1 != n) invalid("jacobi_offdiagonal", "length must be len(jacobi_diagonal) - 1");
            require_finite(cfg.jacobi_diagonal, "jacobi_diagonal");
            require_finite(cfg.jacobi_offdiagonal, "jacobi_offdiagonal");
            ComplexMatrix h0(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                h0(i, i) = cfg.jacobi_diagonal[i];
                if (i + 1 < n) h0(i, i + 1) = h0(i + 1, i) = cfg.jacobi_offdiagonal[i];
            }
            std::vector<double> w = cfg.weights.empty() ? rigging_weights(n, cfg.alpha) : cfg.weights;
            if (w.size() != n) invalid("weights", "length must match jacobi_diagonal");
            return OperatorModel(std::move(h0), ComplexMatrix::diagonal(w), ComplexMatrix::diagonal(signs_or_default(cfg, n)),
                                 cfg.interval, "jacobi");
        }
        case ModelKind::RankOne: {
            ComplexMatrix h0;
            if (cfg.h0) {
                require_hermitian(*cfg.h0, "h0");
                h0 = *cfg.h0;
            } else {
                if (cfg.spectrum.empty()) invalid("spectrum", "rank_one needs spectrum or h0");
                require_finite(cfg.spectrum, "spectrum");
                h0 = ComplexMatrix::diagonal(cfg.spectrum);
            }
            const std::size_t n = h0.rows();
            if (cfg.vector.size() != n) invalid("vector", "length must match dimension " + std::to_string(n));
            double vn = 0.0;
            for (const auto& v : cfg.vector) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) invalid("vector", "not finite");
                vn += std::norm(v);
            }
            if (vn == 0.0) invalid("vector", "must be nonzero");
            if (!std::isfinite(cfg.sign) || cfg.sign == 0.0) invalid("sign", "must be a nonzero finite coupling sign");
            ComplexMatrix j(n, n);
            j(0, 0) = cfg.sign;
            return OperatorModel(std::move(h0), rank_one_rigging(cfg.vector, tol.rank_one_completion), std::move(j), cfg.interval,
                                 "rank_one");
        }
    }
    invalid("kind", "unhandled");
}

ValidationReport validate(const OperatorModel& model) {
    const auto& tol = default_tolerances();
    ValidationReport rep;
    rep.h0_hermiticity = hermiticity_residual(model.h0());
    rep.j_hermiticity = hermiticity_residual(model.j());
    rep.interval_ok = model.interval().a < model.interval().b;

    const auto lu = lu_factor_unchecked(model.f());
    rep.f_min_pivot = lu.min_pivot;
    const auto gram = model.f_adjoint() * model.f();
    try {
        const auto eig = hermitian_eig(gram.real_part());
        rep.f_min_singular = std::sqrt(std::max(eig.eigenvalues.front(), 0.0));
    } catch (const Error&) {
        rep.f_min_singular = 0.0;
    }

    if (rep.h0_hermiticity > tol.hermitian * (1.0 + max_abs(model.h0()))) rep.reasons.push_back("h0 not Hermitian");
    if (rep.j_hermiticity > tol.hermitian * (1.0 + max_abs(model.j()))) rep.reasons.push_back("j not Hermitian");
    if (!(rep.f_min_singular > tol.rigging_min_singular) || rep.f_min_pivot == 0.0)
        rep.reasons.push_back("rigging kernel nontrivial");
    if (!rep.interval_ok) rep.reasons.push_back("interval requires a < b");
    rep.pass = rep.reasons.empty();
    return rep;
}

PerturbedOperator perturbed(const OperatorModel& model, double r) {
    PerturbedOperator out;
    out.r = r;
    out.h_r = model.h0() + model.v() * cplx{r, 0.0};
    return out;
}

}  // namespace bslab
