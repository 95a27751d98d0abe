#include "doctest.h"

#include <cmath>

#include "bslab/error.hpp"
#include "bslab/resolvent.hpp"
#include "oracles.hpp"

using namespace bslab;

namespace {

OperatorModel random_model(Rng& rng, std::size_t n) {
    ComplexMatrix a(n, n), b(n, n), c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
            b(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
            c(i, j) = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        }
    return OperatorModel(a.real_part(), shifted(b, 2.0), c.real_part(), {-1, 1});
}

double min_eigenvalue(const ComplexMatrix& h) { return oracle::eigenvalues(h).front(); }

}  // namespace

TEST_CASE("scalar closed forms on both routes") {
    const auto m = oracle::scalar_a();
    const auto t = sandwiched_direct(m, 0.0, {0.0, 1.0});
    CHECK(std::abs(t.t(0, 0) - cplx{0, 1}) < 1e-15);
    CHECK(t.route == Route::Direct);
    const auto d = sandwiched_direct(m, 1.0, {0.0, 1.0});
    CHECK(std::abs(d.t(0, 0) - cplx{0.5, 0.5}) < 1e-15);
    const auto i = sandwiched_identity(m, 1.0, {0.0, 1.0});
    CHECK(std::abs(i.t(0, 0) - cplx{0.5, 0.5}) < 1e-15);
    CHECK(i.route == Route::Identity);
}

TEST_CASE("identity route at zero coupling is the free sandwich") {
    Rng rng(1);
    const auto m = random_model(rng, 5);
    const SpectralParameter z{0.3, 0.2};
    CHECK(sandwiched_identity(m, 0.0, z).t == sandwiched_direct(m, 0.0, z).t);
}

TEST_CASE("real-axis evaluation on the spectrum is singular") {
    const auto m = oracle::rank1_c();
    try {
        sandwiched_direct(m, -1.5, {0.5, 0.0});
        FAIL("expected SingularMatrix");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularMatrix);
    }
    CHECK_NOTHROW(sandwiched_direct(m, -1.5, {0.7, 0.0}));
}

TEST_CASE("coupling on a real resonance raises CouplingResonanceHit") {
    // scalar-A at lambda off the spectrum: the pole of 1/(s - lambda) is real
    const auto m = oracle::scalar_a();
    try {
        sandwiched_identity(m, 0.4, {0.4, 0.0});
        FAIL("expected CouplingResonanceHit");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CouplingResonanceHit);
    }
}

TEST_CASE("routes agree on random models") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const auto m = random_model(rng, 1 + rng.next() % 16);
        const double s = rng.uniform(-5, 5);
        const SpectralParameter z{rng.uniform(-3, 3), std::pow(10.0, rng.uniform(-6, 0))};
        ComplexMatrix direct, ident;
        try {
            direct = sandwiched_direct(m, s, z).t;
            ident = sandwiched_identity(m, s, z).t;
        } catch (const Error& e) {
            continue;  // singular at this sample; not a disagreement
        }
        CHECK(frobenius_norm(direct - ident) <= 1e-9 * (1.0 + frobenius_norm(direct)));
    }
}

TEST_CASE("imaginary part is positive and conjugation acts as adjoint") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const auto m = random_model(rng, 1 + rng.next() % 10);
        const double s = rng.uniform(-5, 5);
        const cplx z{rng.uniform(-3, 3), std::pow(10.0, rng.uniform(-4, 0))};
        const auto t = sandwiched_at(m, s, z);
        CHECK(min_eigenvalue(t.imag_part()) >= -1e-10);
        CHECK(frobenius_norm(sandwiched_at(m, s, std::conj(z)) - t.adjoint()) <= 1e-12 * (1.0 + frobenius_norm(t)));
    }
}

TEST_CASE("blow-up at an eigenvalue scales like 1/y") {
    const auto m = oracle::rank1_c();
    const double lambda = 0.5;  // eigenvalue of H_{-1.5}
    double prev = 0.0;
    for (double y = 1e-2; y >= 1e-6; y *= 0.1) {
        const double scaled = operator_norm(sandwiched_at(m, -1.5, {lambda, y})) * y;
        if (prev > 0.0) CHECK(std::abs(scaled - prev) < 0.05 * prev);
        prev = scaled;
    }
    CHECK(prev > 0.1);
}

TEST_CASE("lap probe on the scalar model") {
    const auto m = oracle::scalar_a();
    std::vector<double> ys;
    for (double y = 0.1; ys.size() < 20; y *= 0.5) ys.push_back(y);
    const std::vector<double> grid{1.0};
    const auto rep = lap_probe(m, grid, ys);
    REQUIRE(rep.points.size() == 1);
    CHECK(rep.points[0].converged);
    CHECK(std::abs(rep.points[0].limit(0, 0) - cplx{-1, 0}) < 1e-6);
    CHECK(rep.tol_lap == 1e-6);
    CHECK(rep.points[0].distance_to_spectrum == doctest::Approx(1.0));

    const std::vector<double> at_eig{0.0};
    const auto bad = lap_probe(m, at_eig, ys);
    CHECK_FALSE(bad.points[0].converged);
    const auto& inc = bad.points[0].increments;
    for (std::size_t k = 1; k < inc.size(); ++k) CHECK(inc[k] > inc[k - 1]);
}

TEST_CASE("lap probe on a diagonal model between levels") {
    ModelConfig cfg;
    cfg.spectrum = {0.0, 2.0};
    cfg.interval = {0.5, 1.5};
    const auto m = build_model(cfg);
    std::vector<double> ys;
    for (double y = 0.1; ys.size() < 20; y *= 0.5) ys.push_back(y);
    const std::vector<double> grid{0.9, 1.0, 1.1};
    const auto rep = lap_probe(m, grid, ys, 2);
    const auto& p = rep.points[1];
    CHECK(p.converged);
    CHECK(std::abs(p.limit(0, 0) - cplx{-1, 0}) < 1e-6);
    CHECK(std::abs(p.limit(1, 1) - cplx{1, 0}) < 1e-6);
    CHECK(p.level_spacing == doctest::Approx(2.0));
    CHECK(rep.modulus_of_continuity > 0.0);
    CHECK(rep.modulus_of_continuity < 0.5);
}

TEST_CASE("lap probe rejects a non-decreasing schedule") {
    const auto m = oracle::scalar_a();
    const std::vector<double> grid{1.0}, ys{0.1, 0.2};
    CHECK_THROWS_AS(lap_probe(m, grid, ys), Error);
}
