#pragma once

#include "latgeo/common.hpp"
#include "latgeo/rng.hpp"

#include <vector>

namespace latgeo {

/// Bezier curve over explicit control points, evaluated by de Casteljau.
struct BezierCurve {
    std::vector<Vector> control;

    Vector eval(double t) const;
};

/// Random pretraining candidate between two latent points: control-point
/// centers sit on the straight line at fractions k/K, interior points are
/// displaced orthogonally to z1-z0 by uniform draws whose total range is
/// half the endpoint distance. Endpoints stay fixed.
BezierCurve bezier_sample(const Vector& z0, const Vector& z1, int control_count, Rng& rng);

} // namespace latgeo
