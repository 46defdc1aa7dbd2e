#pragma once

#include "latgeo/bezier.hpp"
#include "latgeo/common.hpp"
#include "latgeo/curve.hpp"
#include "latgeo/io.hpp"
#include "latgeo/iwae.hpp"
#include "latgeo/metric.hpp"
#include "latgeo/mlp.hpp"

#include <filesystem>
#include <functional>

namespace latgeo {

struct GeodesicConfig {
    int n = 500;                  // curve sample points
    double learning_rate = 1e-2;
    int max_iters = 2000;
    int patience = 200;           // stop after this many non-improving iters
    double lambda_s = 0.0;
    Index rank = 0;               // 0 = full rank
    double lambda_phi = 1.0;      // max-velocity weight in the validation value
    int pretrain_curves = 8;      // random Bezier candidates
    int bezier_control_count = 5; // K~
    int pretrain_iters = 500;
    Index curve_width = 150;
    int curve_hidden = 2;
    std::uint64_t rng_seed = 0;

    void validate() const;
    SmoothingConfig smoothing() const { return {lambda_s, rank}; }
};

struct GeodesicResult {
    Vector z0, z1;
    Vector ts;         // midpoint sample positions
    Matrix path;       // n x Nz sampled latent curve
    Vector velocities; // n per-sample velocities
    double length = 0.0;
    double straight_length = 0.0; // same measure, straight segment
    double euclidean = 0.0;       // ||z1 - z0||
    double validation = 0.0;      // length + lambda_phi * max velocity
    int iterations = 0;
    bool improved_on_straight = false;
    std::vector<double> trace; // objective per iteration
};

/// Riemannian length/velocities of the straight segment under the same
/// sampling and smoothing; the baseline every optimisation is held against.
GeodesicResult straight_line_result(const Mlp& decoder, const Vector& z0, const Vector& z1,
                                    const GeodesicConfig& cfg);

/// Fits the normalised curve to a target by mean squared deviation at the
/// config's sample points, then scores it: returns length + lambda_phi * max
/// velocity under the config's metric.
double pretrain(CurveNet& curve, const std::function<Vector(double)>& target,
                int fit_iters, const Mlp& decoder, const GeodesicConfig& cfg);

/// Bezier-pretrained, Adam-optimised approximation of the geodesic between
/// two latent points. The straight line is always a candidate, so the
/// reported length never exceeds the straight-line length; failing to improve
/// on it is recorded, not an error.
GeodesicResult optimize_geodesic(const Mlp& decoder, const Vector& z0, const Vector& z1,
                                 const GeodesicConfig& cfg);
GeodesicResult optimize_geodesic(const IwaeModel& model, const Vector& z0, const Vector& z1,
                                 const GeodesicConfig& cfg);

struct InterpolationFrames {
    Matrix geo_latents;      // frames x Nz
    Matrix geo_decoded;      // frames x Nx
    Vector geo_velocities;   // interpolated from the optimised samples
    Matrix straight_latents;
    Matrix straight_decoded;
    Vector straight_velocities;
};

/// Equally spaced frames along the optimised path and its straight-line
/// counterpart, decoded through the model's mean map.
InterpolationFrames interpolate_and_decode(const Mlp& decoder, const GeodesicResult& result,
                                           int frames, const SmoothingConfig* smoothing = nullptr);

/// CSV t,z_1..z_Nz,velocity plus a JSON summary of the scalar outcomes.
void write_geodesic_csv(const std::filesystem::path& path, const GeodesicResult& result);
Json geodesic_summary(const GeodesicResult& result, const GeodesicConfig& cfg);

} // namespace latgeo
