#pragma once

namespace bslab {

/// Numerical policy constants shared by all modules. Every threshold the
/// library applies lives here so that reports can echo the values in force.
struct Tolerances {
    // matrix kernels
    double singular_pivot = 1e-14;       // LU pivot floor, relative to ||A||_F
    double hermitian = 1e-12;            // ||H - H*|| relative tolerance
    int eig_max_sweeps = 60;             // QL iterations per eigenvalue
    double opnorm_rel = 1e-8;            // power-iteration stopping rule
    int opnorm_max_iter = 500;

    // models
    double rigging_min_singular = 1e-12;
    double rank_one_completion = 1e-6;   // norm of completion rows in rank-one riggings

    // resolvent / LAP
    double lap_tol = 1e-6;
    int lap_monotone_steps = 3;
    double spectrum_distance = 1e-8;     // y = 0 evaluation guard

    // resonance location
    double boundary_zero_rel = 1e-10;    // min|d| / max|d| on a contour
    double cluster = 1e-6;               // roots closer than this are merged
    int quadtree_depth = 40;
    int contour_nodes = 64;
    int contour_nodes_max = 1024;
    double contour_rel = 1e-10;
    double impacting_delta = 1e-2;
    int halving_max = 6;

    // spectral measures
    double membership = 1e-10;           // closed-interval eigenvalue membership
    double stone_rel = 1e-9;
    int stone_max_evals = 400000;
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

}  // namespace bslab
