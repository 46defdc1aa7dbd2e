#include "latgeo/fdcheck.hpp"

#include <algorithm>
#include <cmath>

namespace latgeo {

Matrix central_differences(const std::function<Vector(const Vector&)>& f, const Vector& x,
                           double h) {
    require(h > 0, "finite difference step must be positive");
    Vector xp = x, xm = x;
    Vector f0 = f(x);
    Matrix out(f0.size(), x.size());
    for (Index j = 0; j < x.size(); ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        out.col(j) = (f(xp) - f(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return out;
}

double relative_deviation(const Matrix& reference, const Matrix& candidate) {
    require(reference.rows() == candidate.rows() && reference.cols() == candidate.cols(),
            "relative_deviation: shape mismatch");
    const double scale = std::max(1.0, reference.cwiseAbs().maxCoeff());
    const double floor = 1e-3 * scale;
    double worst = 0.0;
    for (Index j = 0; j < reference.cols(); ++j) {
        for (Index i = 0; i < reference.rows(); ++i) {
            double denom = std::max({std::abs(reference(i, j)), floor, 1e-12});
            worst = std::max(worst, std::abs(reference(i, j) - candidate(i, j)) / denom);
        }
    }
    return worst;
}

double finite_diff_check(const std::function<Vector(const Vector&)>& f,
                         const std::function<Matrix(const Vector&)>& analytic_jacobian,
                         const std::vector<Vector>& points, double h) {
    double worst = 0.0;
    for (const Vector& x : points) {
        Matrix fd = central_differences(f, x, h);
        Matrix an = analytic_jacobian(x);
        worst = std::max(worst, relative_deviation(fd, an));
    }
    return worst;
}

} // namespace latgeo
