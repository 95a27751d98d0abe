#include "bslab/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bslab/error.hpp"
#include "bslab/parallel.hpp"
#include "bslab/tolerances.hpp"

namespace bslab {

namespace {

ComplexMatrix coupled_hamiltonian(const OperatorModel& model, cplx s) {
    ComplexMatrix h = model.h0();
    if (s != cplx{}) h += model.v() * s;
    return h;
}

void check_parameter(const OperatorModel& model, double s, SpectralParameter z, const char* op) {
    if (!(z.y >= 0.0) || !std::isfinite(z.lambda) || !std::isfinite(s)) {
        fail(ErrorCode::InvalidArgument, op, "spectral parameter requires y >= 0 and finite lambda, s");
    }
    if (z.y == 0.0) {
        const auto eig = hermitian_eig(perturbed(model, s).h_r);
        for (double e : eig.eigenvalues) {
            if (std::abs(e - z.lambda) <= default_tolerances().spectrum_distance) {
                fail(ErrorCode::SingularMatrix, op, "lambda = " + std::to_string(z.lambda) + " lies on the spectrum of H_s");
            }
        }
    }
}

}  // namespace

ComplexMatrix sandwiched_at(const OperatorModel& model, cplx s, cplx z) {
    const auto lu = lu_factor(shifted(coupled_hamiltonian(model, s), -z));
    return model.f() * solve(lu, model.f_adjoint());
}

ComplexMatrix sandwiched_identity_at(const OperatorModel& model, cplx s, cplx z) {
    const ComplexMatrix t0 = sandwiched_at(model, 0.0, z);
    if (s == cplx{}) return t0;
    ComplexMatrix a = t0 * model.j();
    a *= s;
    a = shifted(std::move(a), 1.0);
    const auto lu = lu_factor_unchecked(a);
    if (lu.min_pivot < default_tolerances().singular_pivot * lu.norm_frobenius || lu.min_pivot == 0.0) {
        fail(ErrorCode::CouplingResonanceHit, "sandwiched_identity",
             "I + s J T_z(H0) is singular (min pivot " + std::to_string(lu.min_pivot) + ")");
    }
    return solve(lu, t0);
}

SandwichValue sandwiched_direct(const OperatorModel& model, double s, SpectralParameter z) {
    check_parameter(model, s, z, "sandwiched_direct");
    try {
        return SandwichValue{sandwiched_at(model, s, z.z()), s, z, Route::Direct};
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SingularMatrix) fail(ErrorCode::SingularMatrix, "sandwiched_direct", e.what());
        throw;
    }
}

SandwichValue sandwiched_identity(const OperatorModel& model, double s, SpectralParameter z) {
    check_parameter(model, 0.0, z, "sandwiched_identity");
    return SandwichValue{sandwiched_identity_at(model, s, z.z()), s, z, Route::Identity};
}

LapReport lap_probe(const OperatorModel& model, std::span<const double> lambda_grid, std::span<const double> y_schedule,
                    int threads) {
    const auto& tol = default_tolerances();
    if (y_schedule.empty()) fail(ErrorCode::InvalidArgument, "lap_probe", "y-schedule must be non-empty");
    for (std::size_t k = 0; k < y_schedule.size(); ++k) {
        if (!(y_schedule[k] > 0.0) || (k > 0 && !(y_schedule[k] < y_schedule[k - 1]))) {
            fail(ErrorCode::InvalidArgument, "lap_probe", "y-schedule must be strictly decreasing and positive");
        }
    }

    LapReport rep;
    rep.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    rep.y_schedule.assign(y_schedule.begin(), y_schedule.end());
    rep.tol_lap = tol.lap_tol;
    rep.monotone_steps = tol.lap_monotone_steps;
    rep.points.resize(lambda_grid.size());

    const auto spectrum = hermitian_eig(model.h0()).eigenvalues;
    std::vector<ComplexMatrix> last(lambda_grid.size());

    parallel_for(lambda_grid.size(), threads, [&](std::size_t i) {
        LapPoint pt;
        pt.lambda = lambda_grid[i];
        std::vector<ComplexMatrix> values;
        values.reserve(y_schedule.size());
        for (double y : y_schedule) values.push_back(sandwiched_at(model, 0.0, cplx{pt.lambda, y}));
        for (std::size_t k = 0; k + 1 < values.size(); ++k) pt.increments.push_back(operator_norm(values[k] - values[k + 1]));

        if (values.size() >= 2) {
            const std::size_t a = values.size() - 2, b = values.size() - 1;
            const double ya = y_schedule[a], yb = y_schedule[b];
            // T(y) ~ T0 + c*y  =>  T0 = (ya*T(yb) - yb*T(ya)) / (ya - yb)
            pt.limit = (values[b] * cplx{ya, 0.0} - values[a] * cplx{yb, 0.0}) * cplx{1.0 / (ya - yb), 0.0};
        } else {
            pt.limit = values.back();
        }

        const auto& inc = pt.increments;
        const std::size_t m = static_cast<std::size_t>(tol.lap_monotone_steps);
        bool monotone = inc.size() >= m;
        for (std::size_t k = inc.size() >= m ? inc.size() - m + 1 : 0; monotone && k < inc.size(); ++k)
            monotone = inc[k] < inc[k - 1];
        pt.converged = !inc.empty() && inc.back() < tol.lap_tol && monotone;

        const auto it = std::upper_bound(spectrum.begin(), spectrum.end(), pt.lambda);
        double dist = std::numeric_limits<double>::infinity();
        if (it != spectrum.end()) dist = std::min(dist, *it - pt.lambda);
        if (it != spectrum.begin()) dist = std::min(dist, pt.lambda - *(it - 1));
        pt.distance_to_spectrum = dist;
        if (it != spectrum.end() && it != spectrum.begin()) {
            pt.level_spacing = *it - *(it - 1);
        } else {
            pt.level_spacing = std::numeric_limits<double>::infinity();
        }
        last[i] = values.back();
        rep.points[i] = std::move(pt);
    });

    for (std::size_t i = 0; i + 1 < last.size(); ++i)
        rep.modulus_of_continuity = std::max(rep.modulus_of_continuity, operator_norm(last[i] - last[i + 1]));
    return rep;
}

}  // namespace bslab
