#include "latgeo/bezier.hpp"

#include <Eigen/QR>

namespace latgeo {

Vector BezierCurve::eval(double t) const {
    require(!control.empty(), "Bezier curve has no control points");
    std::vector<Vector> pts = control;
    for (std::size_t level = pts.size() - 1; level > 0; --level)
        for (std::size_t i = 0; i < level; ++i) pts[i] = (1.0 - t) * pts[i] + t * pts[i + 1];
    return pts[0];
}

BezierCurve bezier_sample(const Vector& z0, const Vector& z1, int control_count, Rng& rng) {
    require(control_count >= 2, "need at least two Bezier segments");
    const Vector diff = z1 - z0;
    const double dist = diff.norm();
    require(dist > 0.0, "bezier_sample: endpoints coincide");
    const Index nz = z0.size();

    // orthonormal basis of the complement of the line direction
    Matrix dir = diff / dist;
    Eigen::HouseholderQR<Matrix> qr(dir);
    Matrix Q = qr.householderQ() * Matrix::Identity(nz, nz);

    const int K = control_count;
    BezierCurve curve;
    curve.control.resize(static_cast<std::size_t>(K) + 1);
    curve.control.front() = z0;
    curve.control.back() = z1;
    const double half_range = dist / 4.0; // total support is dist/2
    for (int k = 1; k < K; ++k) {
        const double f = static_cast<double>(k) / static_cast<double>(K);
        Vector pt = f * z0 + (1.0 - f) * z1;
        for (Index d = 1; d < nz; ++d)
            pt += rng.uniform(-half_range, half_range) * Q.col(d);
        curve.control[static_cast<std::size_t>(K - k)] = pt;
    }
    return curve;
}

} // namespace latgeo
