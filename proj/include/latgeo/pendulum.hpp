#pragma once

#include "latgeo/dataset.hpp"
#include "latgeo/rng.hpp"

namespace latgeo {

/// Synthetic pendulum images: a rod of the given length and width rendered
/// from the image center at a random angle, anti-aliased by signed-distance
/// coverage, with per-pixel Gaussian noise clamped to [0,1].
struct PendulumConfig {
    Index image_size = 16;
    Index sample_count = 15000;
    double noise_std = 0.05;
    double angle_min_deg = 0.0;
    double angle_max_deg = 360.0;
    std::uint64_t rng_seed = 0;
    double rod_length = 6.0; // pixels
    double rod_width = 2.0;  // pixels

    void validate() const;
};

/// Noise-free render at one angle; pixels in [0,1], row-major.
Vector render_pendulum(double angle_deg, const PendulumConfig& cfg);

/// Angles uniform over [angle_min, angle_max); per-sample RNG substreams keep
/// generation deterministic independent of evaluation order.
Dataset pendulum_generate(const PendulumConfig& cfg);

/// Angle in degrees recovered by template matching against the noise-free
/// renderer (0.25 degree grid).
double estimate_pendulum_angle(const Vector& image, const PendulumConfig& cfg);

} // namespace latgeo
