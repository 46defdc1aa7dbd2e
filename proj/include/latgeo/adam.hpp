#pragma once

#include "latgeo/common.hpp"

#include <span>
#include <vector>

namespace latgeo {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One trainable tensor paired with its gradient, both viewed flat.
struct ParamBlock {
    double* param = nullptr;
    const double* grad = nullptr;
    Index size = 0;
};

/// Adam with bias correction. Moment buffers mirror the block layout handed
/// to the constructor; the step count advances once per step() call.
class Adam {
public:
    Adam(AdamConfig cfg, const std::vector<Index>& block_sizes);

    /// In-place descent step on every block. Blocks must match the sizes the
    /// state was built with. Deterministic given identical inputs.
    void step(std::span<const ParamBlock> blocks);

    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<Vector> m_;
    std::vector<Vector> v_;
    long t_ = 0;
};

} // namespace latgeo
