#pragma once

#include "latgeo/common.hpp"

#include <functional>
#include <vector>

namespace latgeo {

/// Central finite differences of a vector-valued map, column j holding
/// (f(x + h e_j) - f(x - h e_j)) / 2h.
Matrix central_differences(const std::function<Vector(const Vector&)>& f, const Vector& x,
                           double h);

/// Max relative deviation between an analytic Jacobian and central finite
/// differences over a set of points. Each entry is compared against the
/// finite-difference value with a floor of 1e-3 times the largest magnitude
/// (so a uniformly scaled-wrong gradient reads as error ~1, while
/// round-off noise in near-zero entries does not dominate).
double finite_diff_check(const std::function<Vector(const Vector&)>& f,
                         const std::function<Matrix(const Vector&)>& analytic_jacobian,
                         const std::vector<Vector>& points, double h);

/// Same comparison for two already computed matrices.
double relative_deviation(const Matrix& reference, const Matrix& candidate);

} // namespace latgeo
