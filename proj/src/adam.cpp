#include "latgeo/adam.hpp"

#include <cmath>

namespace latgeo {

Adam::Adam(AdamConfig cfg, const std::vector<Index>& block_sizes) : cfg_(cfg) {
    require(cfg.lr > 0, "Adam learning rate must be positive");
    m_.reserve(block_sizes.size());
    v_.reserve(block_sizes.size());
    for (Index n : block_sizes) {
        m_.push_back(Vector::Zero(n));
        v_.push_back(Vector::Zero(n));
    }
}

void Adam::step(std::span<const ParamBlock> blocks) {
    require(blocks.size() == m_.size(), "Adam::step: block count mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const ParamBlock& blk = blocks[i];
        require(blk.size == m_[i].size(), "Adam::step: block size mismatch");
        Eigen::Map<Vector> p(blk.param, blk.size);
        Eigen::Map<const Vector> g(blk.grad, blk.size);
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
        v_[i] = cfg_.beta2 * v_[i].array() + (1.0 - cfg_.beta2) * g.array().square();
        p.array() -= cfg_.lr * (m_[i].array() / bc1) /
                     ((v_[i].array() / bc2).sqrt() + cfg_.eps);
    }
}

} // namespace latgeo
