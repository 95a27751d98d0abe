#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bslab/matrix.hpp"
#include "bslab/model.hpp"
#include "bslab/resonance.hpp"

namespace bslab {

// In finite dimension every spectral measure is pure point, so the singular
// part E^(s)_K(H_r) is the full spectral projection onto K. Absolutely
// continuous behaviour only shows up through the Stone/Laurent diagnostics.

struct Exclusion {
    double lambda = 0.0;  // flagged grid point
    double lo = 0.0;      // excised open neighbourhood (lo, hi)
    double hi = 0.0;
    std::string reason;
};

/// Finite union of closed intervals, sorted and disjoint.
struct KSet {
    std::vector<Interval> intervals;
    std::vector<Exclusion> exclusions;

    double measure() const;
    bool contains(double x, double tol = 0.0) const;
    static KSet single(double a, double b);
};

struct SpectralProjection {
    double r = 0.0;
    KSet k_set;
    ComplexMatrix projector;
    std::vector<double> eigenvalues_in_k;
};

SpectralProjection spectral_projection(const OperatorModel& model, double r, const KSet& k_set);

/// ||F E_K(H_r)||_HS.
double weighted_projection_hs(const OperatorModel& model, double r, const KSet& k_set);

/// Continuous piecewise-linear function supported on a union of closed
/// intervals and vanishing at every interval endpoint.
class TestFunction {
public:
    struct Piece {
        std::vector<double> grid;    // strictly increasing, grid.front() and grid.back() are the interval ends
        std::vector<double> values;  // values.front() == values.back() == 0
    };

    TestFunction() = default;
    explicit TestFunction(std::vector<Piece> pieces);

    /// Tent of height `peak` on [a, b] with apex at `apex` (midpoint by default).
    static TestFunction tent(double a, double b, double peak, std::optional<double> apex = std::nullopt);

    double operator()(double x) const;
    const std::vector<Piece>& pieces() const noexcept { return pieces_; }
    bool is_zero() const;
    KSet support() const;

private:
    std::vector<Piece> pieces_;
};

/// (1/pi) \int phi(lambda) Im T_{lambda+iy}(H_r) d lambda, adaptive Simpson.
ComplexMatrix stone_functional(const OperatorModel& model, double r, const TestFunction& phi, double y);

/// F phi(H_r) F*.
ComplexMatrix stone_reference(const OperatorModel& model, double r, const TestFunction& phi);

struct StoneReport {
    double r = 0.0;
    TestFunction phi;
    std::vector<double> y_schedule;
    std::vector<ComplexMatrix> values;
    ComplexMatrix reference;
    std::vector<double> errors;  // ||A_y - F phi(H_r) F*||_F
    double order = 0.0;          // log2-type ratio of the last two errors
};

StoneReport stone_convergence(const OperatorModel& model, double r, const TestFunction& phi,
                              std::span<const double> y_schedule);

/// Resonance points at lambda + iy (with Riesz operators) that enter the
/// Laurent split. Returning nullopt means no data exists for that node.
using PoleProvider = std::function<std::optional<std::vector<ResonancePoint>>(double lambda)>;

struct PoleTrackingParams {
    TrackingParams tracking;  // y_min is replaced by the split height y
    double window_lo = 0.0;
    double window_hi = 1.0;
    double delta = 1e-2;
};

/// Tracks trajectories from tracking.y0 down to y at each requested lambda and
/// returns the impacting branches alive at y with their Riesz operators.
PoleProvider tracking_pole_provider(const OperatorModel& model, double y, PoleTrackingParams params);

struct StoneSplit {
    ComplexMatrix ac_part;
    ComplexMatrix pole_part;
    ComplexMatrix total;  // stone functional on the same nodes
    std::size_t nodes = 0;
};

StoneSplit split_stone(const OperatorModel& model, double r, const TestFunction& phi, double y, const PoleProvider& poles);

struct CompactSelection {
    KSet k_set;
    double excised_measure = 0.0;  // |I \ K|
    std::vector<double> lambda_grid;
    std::vector<int> impacting_counts;
};

/// Picks K inside the model interval with |I \ K| <= epsilon, removing
/// neighbourhoods of grid points where an impacting branch could not be
/// followed (branching suspected or lost).
CompactSelection select_compact_k(const OperatorModel& model, double epsilon, std::span<const double> lambda_grid,
                                  const PoleTrackingParams& tracking, int threads = 1);

struct StabilityScanReport {
    KSet k_set;
    std::vector<double> r_grid;
    std::vector<double> hs_norms;
    std::vector<int> eig_counts;
    double max_hs = 0.0;
};

StabilityScanReport stability_scan(const OperatorModel& model, const KSet& k_set, std::span<const double> r_grid,
                                   int threads = 1);

/// Signed count of eigenvalues of H_s crossing level lambda (upward = +1) as
/// s runs from s_from to s_to.
int crossing_count(const OperatorModel& model, double lambda, double s_from, double s_to, int steps = 64);

}  // namespace bslab
