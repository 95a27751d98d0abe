#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bslab/matrix.hpp"

namespace bslab {

enum class ModelKind { Explicit, Diagonal, Schrodinger1d, Jacobi, RankOne };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct Interval {
    double a = 0.0;
    double b = 0.0;

    double length() const { return b - a; }
    bool contains(double x) const { return a < x && x < b; }
};

/// Recipe for an operator model. Only the fields relevant to `kind` are read.
struct ModelConfig {
    ModelKind kind = ModelKind::Diagonal;
    Interval interval{-1.0, 1.0};
    std::uint64_t seed = 0;

    // diagonal / rank_one: H0 = diag(spectrum)
    std::vector<double> spectrum;
    // diagonal: F = diag(weights) (default all ones)
    std::vector<double> weights;
    // J = diag(signs) for diagonal / schrodinger1d / jacobi (default all +1)
    std::vector<double> signs;
    // rigging exponent for the weight family w_n = (1 + n^2)^(-alpha)
    double alpha = 0.5;

    // schrodinger1d
    std::size_t sites = 0;
    std::vector<double> potential;  // V0(n); empty -> i.i.d. uniform in [-disorder/2, disorder/2]
    double disorder = 0.0;

    // jacobi
    std::vector<double> jacobi_diagonal;
    std::vector<double> jacobi_offdiagonal;

    // rank_one: V = sign * |f><f|
    std::vector<cplx> vector;
    double sign = 1.0;

    // explicit (also accepted as H0 override for rank_one)
    std::optional<ComplexMatrix> h0;
    std::optional<ComplexMatrix> f;
    std::optional<ComplexMatrix> j;
};

/// The quadruple (H0, F, J, I) with the derived V = F* J F.
class OperatorModel {
public:
    OperatorModel(ComplexMatrix h0, ComplexMatrix f, ComplexMatrix j, Interval interval, std::string label = {});

    std::size_t dim() const noexcept { return h0_.rows(); }
    const ComplexMatrix& h0() const noexcept { return h0_; }
    const ComplexMatrix& f() const noexcept { return f_; }
    const ComplexMatrix& f_adjoint() const noexcept { return f_adj_; }
    const ComplexMatrix& j() const noexcept { return j_; }
    const ComplexMatrix& v() const noexcept { return v_; }
    const Interval& interval() const noexcept { return interval_; }
    const std::string& label() const noexcept { return label_; }

private:
    ComplexMatrix h0_;
    ComplexMatrix f_;
    ComplexMatrix f_adj_;
    ComplexMatrix j_;
    ComplexMatrix v_;
    Interval interval_;
    std::string label_;
};

struct PerturbedOperator {
    double r = 0.0;
    ComplexMatrix h_r;
};

struct ValidationReport {
    double h0_hermiticity = 0.0;   // max |H_ij - conj(H_ji)|
    double j_hermiticity = 0.0;
    double f_min_singular = 0.0;   // sqrt(lambda_min(F* F))
    double f_min_pivot = 0.0;      // smallest LU pivot of F
    bool interval_ok = false;
    bool pass = false;
    std::vector<std::string> reasons;
};

OperatorModel build_model(const ModelConfig& cfg);
ValidationReport validate(const OperatorModel& model);
PerturbedOperator perturbed(const OperatorModel& model, double r);

/// w_n = (1 + n^2)^(-alpha), n centred on the lattice midpoint.
std::vector<double> rigging_weights(std::size_t n, double alpha);

/// Portable uniform generator: mt19937_64 mapped to [0, 1) with 53-bit
/// resolution, so streams agree across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace bslab
