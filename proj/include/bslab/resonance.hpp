#pragma once

#include <span>
#include <string>
#include <vector>

#include "bslab/matrix.hpp"
#include "bslab/model.hpp"
#include "bslab/resolvent.hpp"

namespace bslab {

/// Axis-aligned rectangle in the complex coupling plane.
struct CouplingBox {
    double re_min = -1.0;
    double re_max = 1.0;
    double im_min = -1.0;
    double im_max = 1.0;

    double width() const { return re_max - re_min; }
    double height() const { return im_max - im_min; }
    cplx center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
    bool contains(cplx s) const {
        return s.real() >= re_min && s.real() <= re_max && s.imag() >= im_min && s.imag() <= im_max;
    }
};

/// d(s) = det(I + s J T_z(H0)) at a fixed z. The product J T_z(H0) is reduced
/// to Hessenberg form once so each evaluation costs O(n^2).
class DeterminantPencil {
public:
    DeterminantPencil(const OperatorModel& model, cplx z);

    cplx z() const noexcept { return z_; }
    const ComplexMatrix& t0() const noexcept { return t0_; }
    LogDet log_value(cplx s) const { return hessenberg_pencil_log_det(hess_, s); }
    cplx value(cplx s) const;

private:
    cplx z_;
    ComplexMatrix t0_;
    ComplexMatrix hess_;
};

struct DeterminantValue {
    LogDet log;
    cplx value;            // meaningful when !log_form
    bool log_form = false; // |log|d|| >= 300: only the log form is representable
};

DeterminantValue perturbation_determinant(const OperatorModel& model, cplx s, SpectralParameter z);

/// Argument-principle count of zeros of d(., z) inside the box.
int count_resonances(const OperatorModel& model, SpectralParameter z, const CouplingBox& box);

struct ResonancePoint {
    cplx r;
    int multiplicity = 1;
    ComplexMatrix riesz;  // empty when not requested
    double det_residual = 0.0;
    SpectralParameter z;
};

struct UnresolvedBox {
    CouplingBox box;
    int winding = 0;
    std::string reason;
};

struct LocateResult {
    std::vector<ResonancePoint> points;  // ordered by (Re r, Im r)
    std::vector<UnresolvedBox> unresolved;
    double det_scale = 0.0;              // max |d| seen on the outer contour
};

struct LocateOptions {
    bool with_riesz = true;
    double newton_tol = 1e-15;  // relative step size at which Newton stops
};

LocateResult locate_resonances(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                               const LocateOptions& opts = {});

/// Same as locate_resonances but perturbs the box slightly (a few
/// deterministic attempts) when a resonance sits on its boundary.
LocateResult locate_resonances_robust(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                                      const LocateOptions& opts = {});

/// Computes the Riesz operator of every point, choosing each circle radius
/// from the distance to its neighbours and halving it until the circle
/// encloses exactly that point's multiplicity.
void attach_riesz_operators(const OperatorModel& model, SpectralParameter z, const CouplingBox& box,
                            std::vector<ResonancePoint>& points);

/// K_z(r) = (1/2 pi i) \oint T_z(H_s) ds on the circle |s - r| = radius.
ComplexMatrix riesz_operator(const OperatorModel& model, SpectralParameter z, cplx r, double radius, int nodes = 64);

/// T_z(H_s) - sum_j (s - r_j)^{-1} K_j.
ComplexMatrix laurent_remainder(const OperatorModel& model, cplx s, SpectralParameter z,
                                std::span<const ResonancePoint> points);

/// dr/dz along the resonance function through r at z (implicit differentiation
/// of d(r(z), z) = 0).
cplx resonance_velocity(const OperatorModel& model, cplx z, cplx r);

// ---------------------------------------------------------------------------

struct TrajectoryPoint {
    double y = 0.0;
    cplx r;
    int multiplicity = 1;
};

struct Branch {
    std::vector<TrajectoryPoint> points;  // y decreasing
    cplx endpoint;                        // linear extrapolation to y = 0
    double window_distance = 0.0;         // filled by classify_impacting
    bool impacting = false;
    bool branching_suspected = false;
    bool lost = false;
};

struct TrackingParams {
    double y0 = 1.0;
    double y_min = 1e-6;
    double shrink = 0.5;
    CouplingBox box{-2.0, 2.0, -2.0, 2.0};
};

struct TrajectorySet {
    double lambda = 0.0;
    std::vector<double> y_ladder;  // rungs actually visited, inserted ones included
    std::vector<Branch> branches;
    CouplingBox box;
    double window_lo = 0.0;
    double window_hi = 1.0;
    double delta = 0.0;
    int inserted_rungs = 0;
};

TrajectorySet track_trajectories(const OperatorModel& model, double lambda, const TrackingParams& params);

TrajectorySet classify_impacting(TrajectorySet traj, double window_lo = 0.0, double window_hi = 1.0, double delta = 1e-2);

/// Distance from s to the real segment [lo, hi].
double distance_to_segment(cplx s, double lo, double hi);

struct ResonanceIndexReport {
    double lambda = 0.0;
    double r = 0.0;
    int n_plus = 0;
    int n_minus = 0;
    int index = 0;
    double y_min = 0.0;
};

ResonanceIndexReport resonance_index(const OperatorModel& model, double lambda, double r, double y_probe,
                                     const CouplingBox& box);

}  // namespace bslab
