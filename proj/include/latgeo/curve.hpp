#pragma once

#include "latgeo/common.hpp"
#include "latgeo/mlp.hpp"
#include "latgeo/rng.hpp"

namespace latgeo {

/// Latent curve represented by a scalar-input network whose output is shifted
/// and rescaled so the endpoints are met structurally: per coordinate
/// z(t) = A zhat(t) - B with A, B computed from the raw endpoint outputs.
/// Coordinates where the raw endpoint outputs (nearly) coincide fall back to
/// an affine endpoint-correction blend, which keeps the interpolation exact
/// and continuous where the paper's formula divides by zero.
struct CurveNet {
    Mlp net; // R -> R^{Nz}
    Vector z0, z1;
    // raw endpoint outputs from the most recent evaluation
    Vector zhat0, zhat1;
};

CurveNet make_curve_net(const Vector& z0, const Vector& z1, Index width, int hidden, Rng& rng);

/// Normalised position and time derivative at one t in [0,1].
std::pair<Vector, Vector> curve_eval(const CurveNet& curve, double t);

/// Batched evaluation of the normalised curve and its velocity at many ts,
/// caching everything the reverse pass needs.
struct CurveBatch {
    Vector ts;             // the n requested sample positions
    Mlp::Cache cache;      // over columns [t_1..t_n, 0, 1]
    Mlp::TangentCache tc;  // single direction d/dt
    Vector A, B;           // normalisation per coordinate (non-degenerate)
    std::vector<bool> degenerate;
    Matrix Z;              // Nz x n normalised positions
    Matrix V;              // Nz x n velocities dz/dt
};

void curve_eval_batch(CurveNet& curve, const Vector& ts, CurveBatch& out);

/// Reverse pass through normalisation and network: cotangents on Z and V
/// accumulate into the network's parameter gradients (including the paths
/// through the endpoint outputs that define A and B).
void curve_backward_batch(const CurveNet& curve, const CurveBatch& batch, const Matrix& gz,
                          const Matrix& gv, MlpGrads& grads);

} // namespace latgeo
