#pragma once

#include "latgeo/activation.hpp"
#include "latgeo/common.hpp"
#include "latgeo/rng.hpp"

#include <vector>

namespace latgeo {

/// One fully connected layer. When `residual` is set the layer computes
/// x + f(Wx + b) and W must be square.
struct Layer {
    Matrix W;
    Vector b;
    Activation act = Activation::Linear;
    bool residual = false;
};

class Mlp;

/// Parameter gradients mirroring an Mlp's layer list.
struct MlpGrads {
    std::vector<Matrix> dW;
    std::vector<Vector> db;

    void resize_like(const Mlp& net);
    void set_zero();
    void axpy(double alpha, const MlpGrads& other);
};

/// Feed-forward network over smooth activations.
///
/// Besides plain evaluation it exposes the differential passes the geodesic
/// machinery is built on: analytic Jacobians, the derivative of the Jacobian
/// with respect to the input, reverse mode for parameter gradients, and
/// reverse-over-forward for objectives that involve the input tangent
/// (curve velocities). Batched variants treat points as columns so the heavy
/// lifting stays inside matrix products.
class Mlp {
public:
    Mlp() = default;
    explicit Mlp(std::vector<Layer> layers);

    /// Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases.
    static Mlp random(const std::vector<Index>& dims, const std::vector<Activation>& acts,
                      Rng& rng);

    Index input_dim() const { return input_dim_; }
    Index output_dim() const { return output_dim_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    Index param_count() const;

    Vector forward(const Vector& z) const;
    /// J(i,j) = d out_i / d in_j.
    Matrix jacobian(const Vector& z) const;
    /// Rank-3 result as slices over the derivative index:
    /// result[k](i,j) = d^2 out_i / (d in_j d in_k). Symmetric in (j,k).
    std::vector<Matrix> jacobian_dz(const Vector& z) const;

    struct Cache {
        std::vector<Matrix> h; // h[0] input; h[l+1] output of layer l
        std::vector<Matrix> a; // pre-activations
        std::vector<Matrix> d1; // f'(a) per layer
    };

    Matrix forward_batch(const Matrix& Z, Cache* cache = nullptr) const;

    /// Reverse pass. `gout` holds dL/d(output) per column. Parameter grads are
    /// accumulated into `grads` (caller zeroes); input cotangents go to `gin`.
    void backward_batch(const Cache& cache, const Matrix& gout, MlpGrads& grads,
                        Matrix* gin = nullptr) const;

    struct TangentCache {
        // t[l][a]: tangent of h[l] along direction a; u[l][a]: W * t[l][a]
        std::vector<std::vector<Matrix>> t;
        std::vector<std::vector<Matrix>> u;
    };

    /// Forward-mode directional derivatives. T0[a] gives the input tangent of
    /// direction a per column; returns the output tangents.
    std::vector<Matrix> tangent_batch(const Cache& cache, const std::vector<Matrix>& T0,
                                      TangentCache* tc = nullptr) const;

    /// Second directional derivatives for all direction pairs (a,b), a >= b.
    /// R[a][b].col(i) = d^2 out / (d dir_a d dir_b) at point i; R[b][a] aliases
    /// the same data by symmetry.
    std::vector<std::vector<Matrix>> second_batch(const Cache& cache,
                                                  const TangentCache& tc) const;

    /// Reverse over forward+tangent for a single tangent direction.
    /// Cotangents arrive on the output value and output tangent; parameter
    /// grads accumulate into `grads`; input cotangents are optional.
    void tangent_backward_batch(const Cache& cache, const TangentCache& tc, Index dir,
                                const Matrix& gout_value, const Matrix& gout_tangent,
                                MlpGrads& grads, Matrix* gin_value = nullptr,
                                Matrix* gin_tangent = nullptr) const;

    /// Flattened parameters in file order (per layer: W row-major, then b).
    Vector get_params() const;
    void set_params(const Vector& flat);

private:
    std::vector<Layer> layers_;
    Index input_dim_ = 0;
    Index output_dim_ = 0;
};

} // namespace latgeo
