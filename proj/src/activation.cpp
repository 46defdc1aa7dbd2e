#include "latgeo/activation.hpp"

#include <cmath>

namespace latgeo {
namespace {

double stable_sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    double e = std::exp(v);
    return e / (1.0 + e);
}

double stable_softplus(double v) {
    return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v)));
}

} // namespace

ActivationDerivs activation_eval(Activation kind, double v) {
    switch (kind) {
    case Activation::Linear:
        return {v, 1.0, 0.0};
    case Activation::Tanh: {
        double h = std::tanh(v);
        double d1 = 1.0 - h * h;
        return {h, d1, -2.0 * h * d1};
    }
    case Activation::Sigmoid: {
        double s = stable_sigmoid(v);
        double d1 = s * (1.0 - s);
        return {s, d1, d1 * (1.0 - 2.0 * s)};
    }
    case Activation::Softplus: {
        double s = stable_sigmoid(v);
        return {stable_softplus(v), s, s * (1.0 - s)};
    }
    }
    throw std::invalid_argument("unknown activation kind");
}

std::string_view activation_name(Activation kind) {
    switch (kind) {
    case Activation::Linear: return "linear";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softplus: return "softplus";
    }
    throw std::invalid_argument("unknown activation kind");
}

Activation activation_from_name(std::string_view name) {
    if (name == "linear") return Activation::Linear;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softplus") return Activation::Softplus;
    if (name == "relu" || name == "leaky_relu" || name == "prelu" || name == "hardtanh")
        throw std::invalid_argument("activation '" + std::string(name) +
                                    "' is piecewise linear and not supported");
    throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

void activation_apply(Activation kind, const Matrix& pre, Matrix& value) {
    switch (kind) {
    case Activation::Linear:
        value = pre;
        return;
    case Activation::Tanh:
        value = pre.array().tanh();
        return;
    case Activation::Sigmoid:
        // logistic(v) = (tanh(v/2) + 1) / 2 keeps the vectorised tanh path
        value = ((pre.array() * 0.5).tanh() + 1.0) * 0.5;
        return;
    case Activation::Softplus:
        value = pre.array().max(0.0) + (-pre.array().abs()).exp().log1p();
        return;
    }
    throw std::invalid_argument("unknown activation kind");
}

void activation_d1(Activation kind, const Matrix& pre, const Matrix& value, Matrix& d1) {
    switch (kind) {
    case Activation::Linear:
        d1 = Matrix::Ones(pre.rows(), pre.cols());
        return;
    case Activation::Tanh:
        d1 = 1.0 - value.array().square();
        return;
    case Activation::Sigmoid:
        d1 = value.array() * (1.0 - value.array());
        return;
    case Activation::Softplus:
        d1 = ((pre.array() * 0.5).tanh() + 1.0) * 0.5;
        return;
    }
    throw std::invalid_argument("unknown activation kind");
}

void activation_d2(Activation kind, const Matrix& pre, const Matrix& value, Matrix& d2) {
    switch (kind) {
    case Activation::Linear:
        d2 = Matrix::Zero(pre.rows(), pre.cols());
        return;
    case Activation::Tanh:
        d2 = -2.0 * value.array() * (1.0 - value.array().square());
        return;
    case Activation::Sigmoid:
        d2 = value.array() * (1.0 - value.array()) * (1.0 - 2.0 * value.array());
        return;
    case Activation::Softplus: {
        Matrix s = ((pre.array() * 0.5).tanh() + 1.0) * 0.5;
        d2 = s.array() * (1.0 - s.array());
        return;
    }
    }
    throw std::invalid_argument("unknown activation kind");
}

} // namespace latgeo
