#include "latgeo/pendulum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace latgeo {

void PendulumConfig::validate() const {
    require(image_size >= 4, "pendulum image size too small");
    require(sample_count >= 1, "pendulum sample count must be positive");
    require(noise_std >= 0.0, "pendulum noise std must be nonnegative");
    require(angle_max_deg > angle_min_deg, "pendulum angle range must be nonempty");
    require(rod_length > 0 && rod_width > 0, "pendulum rod geometry must be positive");
}

Vector render_pendulum(double angle_deg, const PendulumConfig& cfg) {
    cfg.validate();
    const Index s = cfg.image_size;
    const double c = static_cast<double>(s) / 2.0;
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double ux = std::cos(theta);
    const double uy = std::sin(theta);
    const double half_w = cfg.rod_width / 2.0;

    Vector img(s * s);
    for (Index y = 0; y < s; ++y) {
        const double py = c - (static_cast<double>(y) + 0.5); // y up
        for (Index x = 0; x < s; ++x) {
            const double px = static_cast<double>(x) + 0.5 - c;
            // distance from the pixel center to the rod segment
            const double along = std::clamp(px * ux + py * uy, 0.0, cfg.rod_length);
            const double dx = px - along * ux;
            const double dy = py - along * uy;
            const double sdf = std::sqrt(dx * dx + dy * dy) - half_w;
            img[y * s + x] = std::clamp(0.5 - sdf, 0.0, 1.0); // 1px coverage ramp
        }
    }
    return img;
}

Dataset pendulum_generate(const PendulumConfig& cfg) {
    cfg.validate();
    const Index dim = cfg.image_size * cfg.image_size;
    Dataset ds;
    ds.samples.resize(cfg.sample_count, dim);
    ds.annotation_names = {"angle_deg"};
    ds.annotations.resize(cfg.sample_count, 1);

    Rng root(cfg.rng_seed);
    Rng samples = root.substream("pendulum");
    for (Index i = 0; i < cfg.sample_count; ++i) {
        Rng rng = samples.substream(static_cast<std::uint64_t>(i));
        const double angle = rng.uniform(cfg.angle_min_deg, cfg.angle_max_deg);
        Vector img = render_pendulum(angle, cfg);
        if (cfg.noise_std > 0.0) {
            for (Index p = 0; p < dim; ++p)
                img[p] = std::clamp(img[p] + cfg.noise_std * rng.normal(), 0.0, 1.0);
        }
        ds.samples.row(i) = img.transpose();
        ds.annotations(i, 0) = angle;
    }
    ds.provenance = {{"generator", "pendulum"},
                     {"seed", cfg.rng_seed},
                     {"config",
                      {{"image_size", cfg.image_size},
                       {"sample_count", cfg.sample_count},
                       {"noise_std", cfg.noise_std},
                       {"angle_min_deg", cfg.angle_min_deg},
                       {"angle_max_deg", cfg.angle_max_deg},
                       {"rod_length", cfg.rod_length},
                       {"rod_width", cfg.rod_width}}}};
    return ds;
}

double estimate_pendulum_angle(const Vector& image, const PendulumConfig& cfg) {
    require(image.size() == cfg.image_size * cfg.image_size,
            "estimate_pendulum_angle: image size mismatch");
    double best_angle = 0.0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (double a = 0.0; a < 360.0; a += 0.25) {
        Vector tpl = render_pendulum(a, cfg);
        const double denom = tpl.norm();
        const double score = denom > 0 ? image.dot(tpl) / denom : 0.0;
        if (score > best_score) {
            best_score = score;
            best_angle = a;
        }
    }
    return best_angle;
}

} // namespace latgeo
