#pragma once

#include "latgeo/common.hpp"

#include <string>
#include <string_view>

namespace latgeo {

/// Activations usable in differentiated networks. All four are smooth;
/// kinked (piecewise-linear) activations such as ReLU are not representable,
/// since curve-length gradients need the second derivative of every layer
/// (a constant first derivative would zero them out).
enum class Activation { Linear, Tanh, Sigmoid, Softplus };

struct ActivationDerivs {
    double value;
    double d1;
    double d2;
};

/// f(v), f'(v), f''(v) at a point. Softplus and sigmoid use the
/// overflow-safe branches; the second derivatives are expressed through the
/// logistic so they stay finite for any argument.
ActivationDerivs activation_eval(Activation kind, double v);

std::string_view activation_name(Activation kind);

/// Parses an activation name. Unknown names, including the ReLU family,
/// raise std::invalid_argument.
Activation activation_from_name(std::string_view name);

/// Elementwise array forms used by the batched network passes.
/// `pre` is the pre-activation; outputs are resized as needed.
void activation_apply(Activation kind, const Matrix& pre, Matrix& value);
/// First derivative; `value` must be the already computed activation of
/// `pre` (tanh and sigmoid derive d1 from it more cheaply).
void activation_d1(Activation kind, const Matrix& pre, const Matrix& value, Matrix& d1);
/// Second derivative under the same convention.
void activation_d2(Activation kind, const Matrix& pre, const Matrix& value, Matrix& d2);

} // namespace latgeo
