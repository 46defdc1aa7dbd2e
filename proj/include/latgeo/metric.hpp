#pragma once

#include "latgeo/common.hpp"
#include "latgeo/mlp.hpp"

#include <functional>
#include <optional>

namespace latgeo {

/// SVD smoothing parameters: retained singular values are remapped
/// s -> s^3 / (s^2 + lambda_s) and everything beyond `rank` is dropped.
struct SmoothingConfig {
    double lambda_s = 0.0;
    Index rank = 0; // 0 means full rank

    void validate(Index nz) const;
    Index effective_rank(Index nz) const { return rank == 0 ? nz : rank; }
    bool is_identity(Index nz) const { return lambda_s == 0.0 && effective_rank(nz) == nz; }
};

/// Pullback metric G = J^T J at a latent point, with the SVD factors of the
/// symmetric PSD matrix cached when smoothing has been applied or requested.
/// Since G is symmetric PSD its SVD coincides with the eigendecomposition,
/// so U doubles as V.
struct MetricTensor {
    Matrix G;
    std::optional<Matrix> U;          // orthonormal columns
    std::optional<Vector> singular_values; // non-increasing

    Index dim() const { return G.rows(); }
    /// Computes and caches the factors (non-increasing singular values).
    void ensure_svd();
};

/// G = J^T J from the decoder's analytic Jacobian; optionally smoothed.
MetricTensor metric_tensor(const Mlp& decoder, const Vector& z,
                           const SmoothingConfig* smoothing = nullptr);

/// Low-rank reconstruction with singular values s^3/(s^2 + lambda_s).
MetricTensor smooth_metric(const MetricTensor& metric, const SmoothingConfig& cfg);

/// sqrt(dz^T G dz) with optional smoothing; raises NumericError if the
/// quadratic form is negative beyond tolerance.
double velocity(const Mlp& decoder, const Vector& z, const Vector& dz,
                const SmoothingConfig* smoothing = nullptr);

/// Curve sample: position and time derivative at one t.
using CurveFn = std::function<std::pair<Vector, Vector>(double)>;

/// Midpoint-rule approximation (1/n) sum velocity(t_i), t_i = (i-0.5)/n.
double curve_length(const Mlp& decoder, const CurveFn& curve, int n,
                    const SmoothingConfig* smoothing = nullptr);

/// sqrt(det G); the local volume distortion of the decoder map.
double magnification_factor(const Mlp& decoder, const Vector& z);

/// Smoothed quadratic-form evaluation with analytic derivatives, used by the
/// geodesic objective. Given the Jacobian J at z, the rank-3 slices
/// dJ[k] = dJ/dz_k, and the curve velocity v, returns
///   phi   = sqrt(v^T Ghat v)
///   dphi_dv
///   dphi_dz (through the spectral-function derivative of Ghat = f(G))
/// With lambda_s = 0 and full rank this reduces exactly to the plain metric.
struct VelocityDerivs {
    double phi;
    Vector dphi_dv;
    Vector dphi_dz;
};
VelocityDerivs smoothed_velocity_derivs(const Matrix& J, const std::vector<Matrix>& dJ,
                                        const Vector& v, const SmoothingConfig& cfg);

/// Value-only variant of the above for precomputed Jacobians.
double smoothed_velocity_value(const Matrix& J, const Vector& v, const SmoothingConfig& cfg);

} // namespace latgeo
