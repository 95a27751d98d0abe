#include "bslab/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

#include "bslab/error.hpp"
#include "bslab/tolerances.hpp"

namespace bslab {

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Argument principle on a closed path

struct Winding {
    int winding = 0;
    double max_log = -std::numeric_limits<double>::infinity();
};

class ContourWalker {
public:
    ContourWalker(const DeterminantPencil& pencil, std::function<cplx(double)> path, const char* op)
        : pencil_(pencil), path_(std::move(path)), op_(op) {}

    Winding run(int initial_segments) {
        std::vector<LogDet> samples(initial_segments + 1);
        for (int k = 0; k <= initial_segments; ++k) {
            samples[k] = k == initial_segments ? samples[0] : eval(static_cast<double>(k) / initial_segments);
        }
        for (int k = 0; k < initial_segments; ++k) {
            refine(static_cast<double>(k) / initial_segments, static_cast<double>(k + 1) / initial_segments, samples[k],
                   samples[k + 1], 0);
        }
        const double turns = total_ / (2.0 * kPi);
        const double rounded = std::round(turns);
        if (std::abs(turns - rounded) > 0.25) {
            fail(ErrorCode::BoundaryZero, op_, "argument increment is not an integer multiple of 2 pi");
        }
        return Winding{static_cast<int>(rounded), max_log_};
    }

private:
    LogDet eval(double t) {
        const LogDet d = pencil_.log_value(path_(t));
        if (!std::isfinite(d.log_modulus)) {
            fail(ErrorCode::BoundaryZero, op_, "determinant vanishes on the contour");
        }
        max_log_ = std::max(max_log_, d.log_modulus);
        return d;
    }

    void refine(double t0, double t1, const LogDet& d0, const LogDet& d1, int depth) {
        const double dphase = wrap_phase(d1.phase - d0.phase);
        const double dlog = std::abs(d1.log_modulus - d0.log_modulus);
        if (std::abs(dphase) <= kPi / 4.0 && dlog <= 0.7) {
            total_ += dphase;
            return;
        }
        // a zero this close to the contour cannot be separated from it
        if (t1 - t0 < min_segment_ || depth > 48) {
            fail(ErrorCode::BoundaryZero, op_, "resonance point on or too close to the contour");
        }
        const double tm = 0.5 * (t0 + t1);
        const LogDet dm = eval(tm);
        refine(t0, tm, d0, dm, depth + 1);
        refine(tm, t1, dm, d1, depth + 1);
    }

    const DeterminantPencil& pencil_;
    std::function<cplx(double)> path_;
    double min_segment_ = 1e-10;  // relative to the whole path
    const char* op_;
    double total_ = 0.0;
    double max_log_ = -std::numeric_limits<double>::infinity();
};

Winding box_winding(const DeterminantPencil& pencil, const CouplingBox& box, const char* op) {
    const std::array<cplx, 4> corners{cplx{box.re_min, box.im_min}, cplx{box.re_max, box.im_min},
                                      cplx{box.re_max, box.im_max}, cplx{box.re_min, box.im_max}};
    auto path = [corners](double t) {
        const double u = 4.0 * t;
        const int edge = std::min(3, static_cast<int>(u));
        const double f = u - edge;
        const cplx a = corners[edge], b = corners[(edge + 1) % 4];
        // keep the fixed coordinate of each edge exact
        if (edge % 2 == 0) return cplx{a.real() + (b.real() - a.real()) * f, a.imag()};
        return cplx{a.real(), a.imag() + (b.imag() - a.imag()) * f};
    };
    ContourWalker walker(pencil, path, op);
    return walker.run(32);
}

Winding circle_winding(const DeterminantPencil& pencil, cplx center, double radius, const char* op) {
    auto path = [center, radius](double t) { return center + std::polar(radius, 2.0 * kPi * t); };
    ContourWalker walker(pencil, path, op);
    return walker.run(32);
}

cplx log_ratio_exp(const LogDet& num, const LogDet& den) {
    return std::exp(cplx{num.log_modulus - den.log_modulus, wrap_phase(num.phase - den.phase)});
}

/// Newton (modified for multiplicity) on d(., z) with a central-difference
/// derivative of log d.
std::optional<cplx> newton(const DeterminantPencil& pencil, cplx s, int mult, double scale, double tol) {
    double best_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 80; ++it) {
        const LogDet d0 = pencil.log_value(s);
        if (!std::isfinite(d0.log_modulus)) return s;
        const double h = std::min(1e-7 * (1.0 + std::abs(s)), 1e-3 * scale);
        const cplx qp = log_ratio_exp(pencil.log_value(s + h), d0);
        const cplx qm = log_ratio_exp(pencil.log_value(s - h), d0);
        const cplx denom = qp - qm;
        if (denom == cplx{} || !std::isfinite(denom.real()) || !std::isfinite(denom.imag())) return std::nullopt;
        const cplx step = -static_cast<double>(mult) * 2.0 * h / denom;
        s += step;
        const double size = std::abs(step);
        if (size <= tol * (1.0 + std::abs(s))) return s;
        if (it > 10 && size < 1e-11 * (1.0 + std::abs(s)) && size >= 0.5 * best_step) return s;  // rounding floor
        best_step = std::min(best_step, size);
    }
    return std::nullopt;
}

struct Quadtree {
    const DeterminantPencil& pencil;
    const LocateOptions& opts;
    const Tolerances& tol;
    LocateResult& out;

    void process(const CouplingBox& box, int w, int depth) {
        if (w == 0) return;
        const double side = std::max(box.width(), box.height());
        if (w == 1) {
            if (auto root = newton(pencil, box.center(), 1, side, opts.newton_tol); root && inside(box, *root)) {
                add(*root, 1);
                return;
            }
            if (side < tol.cluster || depth >= tol.quadtree_depth) {
                out.unresolved.push_back({box, w, "NewtonStall"});
                return;
            }
        } else if (side < tol.cluster) {
            auto root = newton(pencil, box.center(), w, side, opts.newton_tol);
            add(root && inside(box, *root) ? *root : box.center(), w);
            return;
        }
        if (depth >= tol.quadtree_depth) {
            out.unresolved.push_back({box, w, "depth cap"});
            return;
        }
        static constexpr std::array<double, 6> fractions{0.5, 0.4637, 0.5371, 0.4219, 0.5813, 0.3791};
        for (double fr : fractions) {
            const double xm = box.re_min + fr * box.width();
            const double ym = box.im_min + (1.0 - fr) * box.height();
            const std::array<CouplingBox, 4> kids{CouplingBox{box.re_min, xm, box.im_min, ym},
                                                  CouplingBox{xm, box.re_max, box.im_min, ym},
                                                  CouplingBox{box.re_min, xm, ym, box.im_max},
                                                  CouplingBox{xm, box.re_max, ym, box.im_max}};
            std::array<int, 4> windings{};
            try {
                int sum = 0;
                for (int k = 0; k < 4; ++k) {
                    windings[k] = box_winding(pencil, kids[k], "locate_resonances").winding;
                    sum += windings[k];
                }
                if (sum != w) continue;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::BoundaryZero) throw;
                continue;
            }
            for (int k = 0; k < 4; ++k) process(kids[k], windings[k], depth + 1);
            return;
        }
        out.unresolved.push_back({box, w, "no admissible subdivision"});
    }

    static bool inside(const CouplingBox& box, cplx s) {
        const double m = 1e-9 * std::max(box.width(), box.height());
        return s.real() >= box.re_min - m && s.real() <= box.re_max + m && s.imag() >= box.im_min - m &&
               s.imag() <= box.im_max + m;
    }

    void add(cplx r, int mult) {
        ResonancePoint p;
        p.r = r;
        p.multiplicity = mult;
        out.points.push_back(std::move(p));
    }
};

void merge_clusters(std::vector<ResonancePoint>& pts, double threshold) {
    std::vector<ResonancePoint> merged;
    std::vector<bool> used(pts.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (used[i]) continue;
        ResonancePoint acc = pts[i];
        cplx weighted = acc.r * static_cast<double>(acc.multiplicity);
        int total = acc.multiplicity;
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            if (!used[j] && std::abs(pts[j].r - acc.r) < threshold) {
                used[j] = true;
                weighted += pts[j].r * static_cast<double>(pts[j].multiplicity);
                total += pts[j].multiplicity;
            }
        }
        if (total != acc.multiplicity) acc.r = weighted / static_cast<double>(total);
        acc.multiplicity = total;
        merged.push_back(std::move(acc));
    }
    std::sort(merged.begin(), merged.end(), [](const ResonancePoint& a, const ResonancePoint& b) {
        if (a.r.real() != b.r.real()) return a.r.real() < b.r.real();
        return a.r.imag() < b.r.imag();
    });
    pts = std::move(merged);
}

/// A cell of cluster size that could not be split further, sitting next to a
/// located point, is the other half of a numerically split multiple root.
void absorb_cluster_cells(LocateResult& out, double threshold) {
    std::vector<UnresolvedBox> keep;
    for (const auto& u : out.unresolved) {
        const double side = std::max(u.box.width(), u.box.height());
        ResonancePoint* host = nullptr;
        if (side < 4.0 * threshold) {
            for (auto& p : out.points)
                if (std::abs(p.r - u.box.center()) < threshold + side && (!host || std::abs(p.r - u.box.center()) < std::abs(host->r - u.box.center())))
                    host = &p;
        }
        if (host) {
            host->multiplicity += u.winding;
        } else {
            keep.push_back(u);
        }
    }
    out.unresolved = std::move(keep);
}

ComplexMatrix riesz_with_pencil(const OperatorModel& model, const DeterminantPencil& pencil, SpectralParameter z, cplx r,
                                double radius, int nodes, int expected) {
    const auto& tol = default_tolerances();
    if (!(radius > 0.0) || nodes < 4) fail(ErrorCode::InvalidArgument, "riesz_operator", "radius must be positive and nodes >= 4");
    int enclosed = 0;
    try {
        enclosed = circle_winding(pencil, r, radius, "riesz_operator").winding;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::BoundaryZero) fail(ErrorCode::ContourCrossesPole, "riesz_operator", e.what());
        throw;
    }
    if (enclosed < 1 || (expected > 0 && enclosed != expected)) {
        fail(ErrorCode::InvalidArgument, "riesz_operator",
             "circle encloses " + std::to_string(enclosed) + " resonance(s), expected " +
                 std::to_string(expected > 0 ? expected : 1) + " point");
    }

    const cplx zz = z.z();
    auto term = [&](double theta) {
        const cplx e = std::polar(1.0, theta);
        try {
            return sandwiched_at(model, r + radius * e, zz) * (radius * e);
        } catch (const Error& err) {
            if (err.code() == ErrorCode::SingularMatrix) fail(ErrorCode::ContourCrossesPole, "riesz_operator", err.what());
            throw;
        }
    };

    // trapezoid rule on the circle; doubling reuses the previous nodes
    int n = nodes;
    ComplexMatrix sum = term(0.0);
    for (int k = 1; k < n; ++k) sum += term(2.0 * kPi * k / n);
    ComplexMatrix k_prev = sum * cplx{1.0 / n, 0.0};
    while (n < tol.contour_nodes_max) {
        for (int k = 0; k < n; ++k) sum += term(2.0 * kPi * (2 * k + 1) / (2.0 * n));
        n *= 2;
        ComplexMatrix k_next = sum * cplx{1.0 / n, 0.0};
        const double diff = frobenius_norm(k_next - k_prev);
        const double size = frobenius_norm(k_next);
        if (diff < tol.contour_rel * size || (size == 0.0 && diff == 0.0)) return k_next;
        k_prev = std::move(k_next);
    }
    fail(ErrorCode::QuadratureNoConvergence, "riesz_operator",
         "contour quadrature did not converge within " + std::to_string(tol.contour_nodes_max) + " nodes");
}

void attach_riesz_impl(const OperatorModel& model, const DeterminantPencil& pencil, SpectralParameter z,
                       const CouplingBox& box, std::vector<ResonancePoint>& pts) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) nearest = std::min(nearest, std::abs(pts[i].r - pts[j].r));
        double radius = std::min({0.5 * nearest, 0.25 * std::max(box.width(), box.height()), 0.5});
        for (int attempt = 0;; ++attempt) {
            try {
                pts[i].riesz = riesz_with_pencil(model, pencil, z, pts[i].r, radius, default_tolerances().contour_nodes,
                                                 pts[i].multiplicity);
                break;
            } catch (const Error& e) {
                // another pole (outside the box) inside the circle, or one on it
                const bool retry = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::ContourCrossesPole;
                if (!retry || attempt >= 20) throw;
                radius *= 0.5;
            }
        }
    }
}

std::vector<double> build_ladder(const TrackingParams& p) {
    std::vector<double> ladder;
    double y = p.y0;
    while (y > p.y_min * (1.0 + 1e-9)) {
        ladder.push_back(y);
        y *= p.shrink;
    }
    ladder.push_back(p.y_min);
    return ladder;
}

std::vector<double> speeds(const OperatorModel& model, cplx z, const std::vector<ResonancePoint>& pts) {
    std::vector<double> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        double v = 0.0;
        try {
            v = std::abs(resonance_velocity(model, z, p.r));
        } catch (const Error&) {
            v = 0.0;
        }
        if (!std::isfinite(v)) v = 1e6;
        out.push_back(v);
    }
    return out;
}

cplx linear_endpoint(const Branch& b) {
    if (b.points.size() < 2) return b.points.empty() ? cplx{} : b.points.back().r;
    const auto& pa = b.points[b.points.size() - 2];
    const auto& pb = b.points.back();
    return (pa.y * pb.r - pb.y * pa.r) / (pa.y - pb.y);
}

}  // namespace

// ---------------------------------------------------------------------------

DeterminantPencil::DeterminantPencil(const OperatorModel& model, cplx z) : z_(z) {
    t0_ = sandwiched_at(model, 0.0, z);
    hess_ = hessenberg_form(model.j() * t0_);
}

cplx DeterminantPencil::value(cplx s) const { return log_value(s).value(); }

DeterminantValue perturbation_determinant(const OperatorModel& model, cplx s, SpectralParameter z) {
    if (!(z.y > 0.0)) fail(ErrorCode::InvalidArgument, "perturbation_determinant", "requires y > 0");
    const DeterminantPencil pencil(model, z.z());
    DeterminantValue out;
    out.log = pencil.log_value(s);
    out.log_form = !(std::abs(out.log.log_modulus) < 300.0) && std::isfinite(out.log.log_modulus);
    out.value = std::isfinite(out.log.log_modulus) ? (out.log_form ? cplx{} : out.log.value()) : cplx{};
    return out;
}

int count_resonances(const OperatorModel& model, SpectralParameter z, const CouplingBox& box) {
    if (!(box.re_min < box.re_max && box.im_min < box.im_max)) fail(ErrorCode::InvalidArgument, "count_resonances", "empty box");
    const DeterminantPencil pencil(model, z.z());
    return box_winding(pencil, box, "count_resonances").winding;
}

LocateResult locate_resonances(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                               const LocateOptions& opts) {
    if (!(box.re_min < box.re_max && box.im_min < box.im_max)) fail(ErrorCode::InvalidArgument, "locate_resonances", "empty box");
    const auto& tol = default_tolerances();
    const DeterminantPencil pencil(model, z.z());
    const Winding top = box_winding(pencil, box, "locate_resonances");

    LocateResult out;
    out.det_scale = std::exp(std::min(top.max_log, 700.0));
    Quadtree tree{pencil, opts, tol, out};
    tree.process(box, top.winding, 0);
    merge_clusters(out.points, tol.cluster);
    absorb_cluster_cells(out, tol.cluster);
    for (auto& p : out.points) {
        p.z = z;
        const LogDet d = pencil.log_value(p.r);
        p.det_residual = std::isfinite(d.log_modulus) ? std::exp(d.log_modulus) : 0.0;
    }
    if (opts.with_riesz) attach_riesz_impl(model, pencil, z, box, out.points);
    return out;
}

LocateResult locate_resonances_robust(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                                      const LocateOptions& opts) {
    static constexpr std::array<double, 6> nudges{0.0, 1.3e-3, -2.1e-3, 3.7e-3, -5.3e-3, 8.9e-3};
    const double w = box.width(), h = box.height();
    for (std::size_t k = 0; k < nudges.size(); ++k) {
        const double e = nudges[k];
        const CouplingBox b{box.re_min - e * w, box.re_max + 0.7 * e * w, box.im_min - 0.9 * e * h, box.im_max + 1.1 * e * h};
        try {
            return locate_resonances(model, z, b, opts);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::BoundaryZero || k + 1 == nudges.size()) throw;
        }
    }
    fail(ErrorCode::BoundaryZero, "locate_resonances", "unreachable");
}

void attach_riesz_operators(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                            std::vector<ResonancePoint>& points) {
    const DeterminantPencil pencil(model, z.z());
    attach_riesz_impl(model, pencil, z, box, points);
}

ComplexMatrix riesz_operator(const OperatorModel& model, SpectralParameter z, cplx r, double radius, int nodes) {
    const DeterminantPencil pencil(model, z.z());
    return riesz_with_pencil(model, pencil, z, r, radius, nodes, 0);
}

namespace {

ComplexMatrix remainder_direct(const OperatorModel& model, cplx s, SpectralParameter z, std::span<const ResonancePoint> points) {
    ComplexMatrix t;
    try {
        t = sandwiched_at(model, s, z.z());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularMatrix) fail(ErrorCode::EvaluationAtPole, "laurent_remainder", e.what());
        throw;
    }
    for (const auto& p : points) t -= p.riesz * (1.0 / (s - p.r));
    return t;
}

// Radius of a circle around points[idx] that holds no other zero of d(., z),
// or 0 when none could be certified.
double isolation_radius(const OperatorModel& model, SpectralParameter z, std::span<const ResonancePoint> points, std::size_t idx) {
    const auto& p = points[idx];
    double rho = 0.5 * (1.0 + std::abs(p.r));
    for (std::size_t j = 0; j < points.size(); ++j)
        if (j != idx) rho = std::min(rho, 0.5 * std::abs(points[j].r - p.r));
    for (int attempt = 0; attempt < 8 && rho > 0.0; ++attempt, rho *= 0.5) {
        try {
            const CouplingBox box{p.r.real() - rho, p.r.real() + rho, p.r.imag() - rho, p.r.imag() + rho};
            if (count_resonances(model, z, box) == p.multiplicity) return rho;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BoundaryZero) throw;
        }
    }
    return 0.0;
}

}  // namespace

ComplexMatrix laurent_remainder(const OperatorModel& model, cplx s, SpectralParameter z,
                                std::span<const ResonancePoint> points) {
    std::size_t nearest = points.size();
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (std::abs(s - p.r) <= 1e-15 * (1.0 + std::abs(p.r))) {
            fail(ErrorCode::EvaluationAtPole, "laurent_remainder", "coupling coincides with a supplied resonance point");
        }
        if (p.riesz.empty()) fail(ErrorCode::InvalidArgument, "laurent_remainder", "resonance point carries no Riesz operator");
        if (std::abs(s - p.r) < gap) {
            gap = std::abs(s - p.r);
            nearest = i;
        }
    }

    // Right next to a simple pole the subtraction T - K/(s - r) cancels most
    // digits. The remainder is holomorphic there, so take it from a Cauchy
    // integral over a circle where the subtraction is harmless.
    constexpr double kNear = 0.05;
    if (nearest < points.size() && points[nearest].multiplicity == 1 && gap < kNear * (1.0 + std::abs(points[nearest].r))) {
        const double rho = isolation_radius(model, z, points, nearest);
        if (rho > 0.0 && gap < kNear * rho) {
            constexpr int kNodes = 32;
            const cplx r = points[nearest].r;
            ComplexMatrix acc;
            for (int k = 0; k < kNodes; ++k) {
                const cplx w = std::polar(rho, 2.0 * std::numbers::pi * (k + 0.5) / kNodes);
                auto term = remainder_direct(model, r + w, z, points);
                term *= w / (r + w - s) / static_cast<double>(kNodes);
                if (acc.empty()) {
                    acc = std::move(term);
                } else {
                    acc += term;
                }
            }
            return acc;
        }
    }
    return remainder_direct(model, s, z, points);
}

cplx resonance_velocity(const OperatorModel& model, cplx z, cplx r) {
    const double hz = 1e-3 * std::min(1.0, std::max(std::abs(z.imag()), 1e-12));
    const double hs = 1e-7 * (1.0 + std::abs(r));
    const DeterminantPencil at(model, z);
    const DeterminantPencil up(model, z + hz);
    const DeterminantPencil down(model, z - hz);
    const cplx dz = (up.value(r) - down.value(r)) / (2.0 * hz);
    const cplx ds = (at.value(r + hs) - at.value(r - hs)) / (2.0 * hs);
    if (ds == cplx{}) return cplx{std::numeric_limits<double>::infinity(), 0.0};
    return -dz / ds;
}

// ---------------------------------------------------------------------------

TrajectorySet track_trajectories(const OperatorModel& model, double lambda, const TrackingParams& params) {
    const auto& tol = default_tolerances();
    if (!(params.y0 > params.y_min && params.y_min > 0.0) || !(params.shrink > 0.0 && params.shrink < 1.0)) {
        fail(ErrorCode::InvalidArgument, "track_trajectories", "requires y0 > y_min > 0 and shrink in (0, 1)");
    }
    const auto ladder = build_ladder(params);
    const LocateOptions no_riesz{.with_riesz = false};

    TrajectorySet set;
    set.lambda = lambda;
    set.box = params.box;

    struct Active {
        std::size_t branch;
        double speed;      // |dr/dy| estimate for the first step
        double last_disp;  // displacement over the previous step, < 0 when unknown
        double last_dy;
    };
    std::vector<Active> active;

    auto locate = [&](double y) -> std::optional<LocateResult> {
        try {
            return locate_resonances_robust(model, SpectralParameter{lambda, y}, params.box, no_riesz);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BoundaryZero || e.code() == ErrorCode::SingularMatrix) return std::nullopt;
            throw;
        }
    };
    auto start_branches = [&](const LocateResult& res, const std::vector<bool>& taken, double y) {
        std::vector<ResonancePoint> fresh;
        for (std::size_t i = 0; i < res.points.size(); ++i)
            if (!taken[i]) fresh.push_back(res.points[i]);
        const auto sp = speeds(model, cplx{lambda, y}, fresh);
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            Branch b;
            b.points.push_back({y, fresh[i].r, fresh[i].multiplicity});
            b.branching_suspected = fresh[i].multiplicity > 1;
            set.branches.push_back(std::move(b));
            active.push_back({set.branches.size() - 1, sp[i], -1.0, 0.0});
        }
    };

    double y_prev = ladder.front();
    set.y_ladder.push_back(y_prev);
    if (auto first = locate(y_prev)) {
        start_branches(*first, std::vector<bool>(first->points.size(), false), y_prev);
    }

    for (std::size_t k = 1; k < ladder.size(); ++k) {
        const double target = ladder[k];
        double y_try = target;
        int halvings = 0;
        while (true) {
            const double dy = y_prev - y_try;
            auto res = locate(y_try);
            std::vector<int> match(active.size(), -1);
            std::vector<int> capacity;
            bool all_matched = res.has_value();
            if (res) {
                capacity.resize(res->points.size());
                for (std::size_t i = 0; i < res->points.size(); ++i) capacity[i] = res->points[i].multiplicity;
                struct Cand {
                    double dist;
                    std::size_t a, p;
                };
                std::vector<Cand> cands;
                for (std::size_t a = 0; a < active.size(); ++a) {
                    const auto& st = active[a];
                    const double predicted = st.last_disp >= 0.0 ? st.last_disp * std::max(1.0, dy / st.last_dy) : st.speed * dy;
                    const double radius = 3.0 * (predicted + 1e-8);
                    const cplx last = set.branches[st.branch].points.back().r;
                    for (std::size_t p = 0; p < res->points.size(); ++p) {
                        const double d = std::abs(res->points[p].r - last);
                        if (d <= radius) cands.push_back({d, a, p});
                    }
                }
                std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
                    if (x.dist != y.dist) return x.dist < y.dist;
                    if (x.a != y.a) return x.a < y.a;
                    return x.p < y.p;
                });
                for (const auto& c : cands) {
                    if (match[c.a] >= 0 || capacity[c.p] == 0) continue;
                    match[c.a] = static_cast<int>(c.p);
                    --capacity[c.p];
                }
                for (int m : match) all_matched = all_matched && m >= 0;
            }

            if (!all_matched && halvings < tol.halving_max) {
                ++halvings;
                ++set.inserted_rungs;
                y_try = 0.5 * (y_prev + y_try);
                continue;
            }

            // commit this rung
            std::vector<Active> still;
            std::vector<bool> taken(res ? res->points.size() : 0, false);
            for (std::size_t a = 0; a < active.size(); ++a) {
                auto& br = set.branches[active[a].branch];
                if (match[a] >= 0) {
                    const auto& p = res->points[static_cast<std::size_t>(match[a])];
                    taken[static_cast<std::size_t>(match[a])] = true;
                    const double disp = std::abs(p.r - br.points.back().r);
                    br.points.push_back({y_try, p.r, p.multiplicity});
                    if (p.multiplicity > 1) br.branching_suspected = true;
                    still.push_back({active[a].branch, active[a].speed, disp, dy});
                } else {
                    // collision with another branch, otherwise the point left the box
                    const cplx last = br.points.back().r;
                    bool collided = false;
                    for (std::size_t b = 0; b < active.size(); ++b) {
                        if (b == a) continue;
                        const double gap = std::abs(set.branches[active[b].branch].points.back().r - last);
                        const double reach = 3.0 * (std::max(active[a].last_disp, 0.0) + tol.cluster);
                        if (gap <= reach) collided = true;
                    }
                    if (collided) {
                        br.branching_suspected = true;
                    } else {
                        br.lost = true;
                    }
                }
            }
            active = std::move(still);
            set.y_ladder.push_back(y_try);
            y_prev = y_try;
            if (res) start_branches(*res, taken, y_try);
            if (y_try == target) break;
            y_try = target;
            halvings = 0;
        }
    }

    for (auto& b : set.branches) b.endpoint = linear_endpoint(b);
    return set;
}

double distance_to_segment(cplx s, double lo, double hi) {
    const double dx = s.real() < lo ? lo - s.real() : (s.real() > hi ? s.real() - hi : 0.0);
    return std::hypot(dx, s.imag());
}

TrajectorySet classify_impacting(TrajectorySet traj, double window_lo, double window_hi, double delta) {
    if (!(window_lo <= window_hi) || !(delta >= 0.0)) fail(ErrorCode::InvalidArgument, "classify_impacting", "invalid window or delta");
    traj.window_lo = window_lo;
    traj.window_hi = window_hi;
    traj.delta = delta;
    for (auto& b : traj.branches) {
        double dist = distance_to_segment(b.endpoint, window_lo, window_hi);
        for (const auto& p : b.points) dist = std::min(dist, distance_to_segment(p.r, window_lo, window_hi));
        b.window_distance = dist;
        b.impacting = dist <= delta;
    }
    return traj;
}

ResonanceIndexReport resonance_index(const OperatorModel& model, double lambda, double r, double y_probe,
                                     const CouplingBox& box) {
    if (!(y_probe > 0.0)) fail(ErrorCode::InvalidArgument, "resonance_index", "y_probe must be positive");
    const LocateOptions no_riesz{.with_riesz = false};
    auto count = [&](double y) {
        ResonanceIndexReport rep;
        rep.lambda = lambda;
        rep.r = r;
        rep.y_min = y;
        const cplx z{lambda, y};
        const auto res = locate_resonances_robust(model, SpectralParameter{lambda, y}, box, no_riesz);
        const auto sp = speeds(model, z, res.points);
        for (std::size_t i = 0; i < res.points.size(); ++i) {
            const auto& p = res.points[i];
            const double radius = 10.0 * y * sp[i] + 1e-6;
            if (std::abs(p.r - cplx{r, 0.0}) >= radius) continue;
            if (p.r.imag() > 0.0) rep.n_plus += p.multiplicity;
            if (p.r.imag() < 0.0) rep.n_minus += p.multiplicity;
        }
        rep.index = rep.n_plus - rep.n_minus;
        return rep;
    };
    const auto coarse = count(y_probe);
    const auto fine = count(0.5 * y_probe);
    if (coarse.index != fine.index) {
        fail(ErrorCode::UnstableCount, "resonance_index",
             "index changed from " + std::to_string(coarse.index) + " to " + std::to_string(fine.index) + " under halving of y_probe");
    }
    return coarse;
}

}  // namespace bslab
