#pragma once

#include <span>
#include <vector>

#include "bslab/matrix.hpp"
#include "bslab/model.hpp"

namespace bslab {

/// z = lambda + i*y with y >= 0. y == 0 requests a real-axis evaluation and
/// is only accepted away from the spectrum.
struct SpectralParameter {
    double lambda = 0.0;
    double y = 0.0;

    cplx z() const { return {lambda, y}; }
};

enum class Route { Direct, Identity };

struct SandwichValue {
    ComplexMatrix t;
    double s = 0.0;
    SpectralParameter z;
    Route route = Route::Direct;
};

/// T_z(H_s) = F (H_s - z)^{-1} F* by one LU solve.
SandwichValue sandwiched_direct(const OperatorModel& model, double s, SpectralParameter z);

/// T_z(H_s) = (I + s T_z(H0) J)^{-1} T_z(H0); throws CouplingResonanceHit when
/// the coupling sits on a resonance point of z.
SandwichValue sandwiched_identity(const OperatorModel& model, double s, SpectralParameter z);

/// Direct route at arbitrary complex coupling and spectral parameter.
ComplexMatrix sandwiched_at(const OperatorModel& model, cplx s, cplx z);

/// Identity route at arbitrary complex coupling.
ComplexMatrix sandwiched_identity_at(const OperatorModel& model, cplx s, cplx z);

struct LapPoint {
    double lambda = 0.0;
    std::vector<double> increments;  // ||T(y_k) - T(y_{k+1})||_op
    ComplexMatrix limit;             // Richardson extrapolation from the last two rungs
    bool converged = false;
    double level_spacing = 0.0;      // gap between the eigenvalues of H0 bracketing lambda
    double distance_to_spectrum = 0.0;
};

struct LapReport {
    std::vector<double> lambda_grid;
    std::vector<double> y_schedule;
    std::vector<LapPoint> points;
    double modulus_of_continuity = 0.0;  // max over adjacent lambda of ||T(lambda+iy_min) - T(lambda'+iy_min)||_op
    double tol_lap = 0.0;
    int monotone_steps = 0;
};

LapReport lap_probe(const OperatorModel& model, std::span<const double> lambda_grid, std::span<const double> y_schedule,
                    int threads = 1);

}  // namespace bslab
