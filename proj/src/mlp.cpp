#include "latgeo/mlp.hpp"

#include <cmath>

namespace latgeo {

void MlpGrads::resize_like(const Mlp& net) {
    const auto& ls = net.layers();
    dW.resize(ls.size());
    db.resize(ls.size());
    for (std::size_t l = 0; l < ls.size(); ++l) {
        dW[l] = Matrix::Zero(ls[l].W.rows(), ls[l].W.cols());
        db[l] = Vector::Zero(ls[l].b.size());
    }
}

void MlpGrads::set_zero() {
    for (auto& m : dW) m.setZero();
    for (auto& v : db) v.setZero();
}

void MlpGrads::axpy(double alpha, const MlpGrads& other) {
    for (std::size_t l = 0; l < dW.size(); ++l) {
        dW[l] += alpha * other.dW[l];
        db[l] += alpha * other.db[l];
    }
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
    require(!layers_.empty(), "Mlp needs at least one layer");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& lay = layers_[l];
        require(lay.W.size() > 0, "Mlp layer has empty weight matrix");
        require(lay.b.size() == lay.W.rows(), "Mlp layer bias size mismatch");
        if (lay.residual)
            require(lay.W.rows() == lay.W.cols(), "residual layer must be square");
        if (l > 0)
            require(lay.W.cols() == layers_[l - 1].W.rows(),
                    "Mlp adjacent layer dimensions do not compose");
        check_finite(lay.W, "Mlp weights");
        check_finite(lay.b, "Mlp biases");
    }
    input_dim_ = layers_.front().W.cols();
    output_dim_ = layers_.back().W.rows();
}

Mlp Mlp::random(const std::vector<Index>& dims, const std::vector<Activation>& acts, Rng& rng) {
    require(dims.size() >= 2, "need at least input and output dims");
    require(acts.size() == dims.size() - 1, "one activation per layer required");
    std::vector<Layer> layers(acts.size());
    for (std::size_t l = 0; l < acts.size(); ++l) {
        Index fan_in = dims[l], fan_out = dims[l + 1];
        double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix W(fan_out, fan_in);
        for (Index j = 0; j < fan_in; ++j)
            for (Index i = 0; i < fan_out; ++i) W(i, j) = rng.uniform(-bound, bound);
        layers[l] = Layer{std::move(W), Vector::Zero(fan_out), acts[l], false};
    }
    return Mlp(std::move(layers));
}

Index Mlp::param_count() const {
    Index n = 0;
    for (const auto& l : layers_) n += l.W.size() + l.b.size();
    return n;
}

Vector Mlp::forward(const Vector& z) const {
    require(z.size() == input_dim_, "Mlp::forward: input dimension mismatch");
    check_finite(z, "Mlp::forward input");
    Matrix out = forward_batch(z);
    return out.col(0);
}

Matrix Mlp::forward_batch(const Matrix& Z, Cache* cache) const {
    require(Z.rows() == input_dim_, "Mlp::forward_batch: input dimension mismatch");
    const std::size_t L = layers_.size();
    Cache local;
    Cache& c = cache ? *cache : local;
    c.h.assign(L + 1, Matrix());
    c.a.assign(L, Matrix());
    c.d1.assign(L, Matrix());
    c.h[0] = Z;
    for (std::size_t l = 0; l < L; ++l) {
        const Layer& lay = layers_[l];
        c.a[l].noalias() = lay.W * c.h[l];
        c.a[l].colwise() += lay.b;
        activation_apply(lay.act, c.a[l], c.h[l + 1]);
        if (lay.residual) c.h[l + 1] += c.h[l];
    }
    return c.h[L];
}

namespace {

// f'(a) for a layer given cached pre-activation and value; for residual
// layers the cached h[l+1] includes the skip term, so recompute the pure
// activation value when the derivative formula needs it.
void layer_d1(const Layer& lay, const Matrix& a, const Matrix& h_out, const Matrix& h_in,
              Matrix& d1) {
    if (!lay.residual) {
        activation_d1(lay.act, a, h_out, d1);
        return;
    }
    Matrix value = h_out - h_in;
    activation_d1(lay.act, a, value, d1);
}

void layer_d2(const Layer& lay, const Matrix& a, const Matrix& h_out, const Matrix& h_in,
              Matrix& d2) {
    if (!lay.residual) {
        activation_d2(lay.act, a, h_out, d2);
        return;
    }
    Matrix value = h_out - h_in;
    activation_d2(lay.act, a, value, d2);
}

} // namespace

void Mlp::backward_batch(const Cache& cache, const Matrix& gout, MlpGrads& grads,
                         Matrix* gin) const {
    const std::size_t L = layers_.size();
    require(grads.dW.size() == L, "MlpGrads not sized for this network");
    Matrix hbar = gout;
    Matrix abar, d1;
    for (std::size_t l = L; l-- > 0;) {
        const Layer& lay = layers_[l];
        layer_d1(lay, cache.a[l], cache.h[l + 1], cache.h[l], d1);
        abar = d1.array() * hbar.array();
        grads.dW[l].noalias() += abar * cache.h[l].transpose();
        grads.db[l] += abar.rowwise().sum();
        if (l > 0 || gin) {
            Matrix next = lay.W.transpose() * abar;
            if (lay.residual) next += hbar;
            hbar.swap(next);
        }
    }
    if (gin) *gin = hbar;
}

std::vector<Matrix> Mlp::tangent_batch(const Cache& cache, const std::vector<Matrix>& T0,
                                       TangentCache* tc) const {
    const std::size_t L = layers_.size();
    const std::size_t nd = T0.size();
    TangentCache local;
    TangentCache& t = tc ? *tc : local;
    t.t.assign(L + 1, std::vector<Matrix>(nd));
    t.u.assign(L, std::vector<Matrix>(nd));
    t.t[0] = T0;
    Matrix d1;
    for (std::size_t l = 0; l < L; ++l) {
        const Layer& lay = layers_[l];
        layer_d1(lay, cache.a[l], cache.h[l + 1], cache.h[l], d1);
        for (std::size_t a = 0; a < nd; ++a) {
            t.u[l][a].noalias() = lay.W * t.t[l][a];
            t.t[l + 1][a] = d1.array() * t.u[l][a].array();
            if (lay.residual) t.t[l + 1][a] += t.t[l][a];
        }
    }
    return t.t[L];
}

std::vector<std::vector<Matrix>> Mlp::second_batch(const Cache& cache,
                                                   const TangentCache& tc) const {
    const std::size_t L = layers_.size();
    const std::size_t nd = tc.t[0].size();
    std::vector<std::vector<Matrix>> R(nd, std::vector<Matrix>(nd));
    const Index n = cache.h[0].cols();
    for (std::size_t a = 0; a < nd; ++a)
        for (std::size_t b = 0; b <= a; ++b)
            R[a][b] = Matrix::Zero(input_dim_, n);
    Matrix d1, d2, Q;
    for (std::size_t l = 0; l < L; ++l) {
        const Layer& lay = layers_[l];
        layer_d1(lay, cache.a[l], cache.h[l + 1], cache.h[l], d1);
        layer_d2(lay, cache.a[l], cache.h[l + 1], cache.h[l], d2);
        for (std::size_t a = 0; a < nd; ++a) {
            for (std::size_t b = 0; b <= a; ++b) {
                Q.noalias() = lay.W * R[a][b];
                Matrix next = d2.array() * tc.u[l][a].array() * tc.u[l][b].array() +
                              d1.array() * Q.array();
                if (lay.residual) next += R[a][b];
                R[a][b].swap(next);
            }
        }
    }
    for (std::size_t a = 0; a < nd; ++a)
        for (std::size_t b = a + 1; b < nd; ++b) R[a][b] = R[b][a];
    return R;
}

void Mlp::tangent_backward_batch(const Cache& cache, const TangentCache& tc, Index dir,
                                 const Matrix& gout_value, const Matrix& gout_tangent,
                                 MlpGrads& grads, Matrix* gin_value, Matrix* gin_tangent) const {
    const std::size_t L = layers_.size();
    const std::size_t a_idx = static_cast<std::size_t>(dir);
    Matrix hbar = gout_value;
    Matrix tbar = gout_tangent;
    Matrix d1, d2, abar, ubar;
    for (std::size_t l = L; l-- > 0;) {
        const Layer& lay = layers_[l];
        layer_d1(lay, cache.a[l], cache.h[l + 1], cache.h[l], d1);
        layer_d2(lay, cache.a[l], cache.h[l + 1], cache.h[l], d2);
        const Matrix& u = tc.u[l][a_idx];
        abar = d1.array() * hbar.array() + d2.array() * u.array() * tbar.array();
        ubar = d1.array() * tbar.array();
        grads.dW[l].noalias() += abar * cache.h[l].transpose();
        grads.dW[l].noalias() += ubar * tc.t[l][a_idx].transpose();
        grads.db[l] += abar.rowwise().sum();
        if (l > 0 || gin_value) {
            Matrix next_h = lay.W.transpose() * abar;
            if (lay.residual) next_h += hbar;
            hbar.swap(next_h);
        }
        if (l > 0 || gin_tangent) {
            Matrix next_t = lay.W.transpose() * ubar;
            if (lay.residual) next_t += tbar;
            tbar.swap(next_t);
        }
    }
    if (gin_value) *gin_value = hbar;
    if (gin_tangent) *gin_tangent = tbar;
}

Matrix Mlp::jacobian(const Vector& z) const {
    require(z.size() == input_dim_, "Mlp::jacobian: input dimension mismatch");
    check_finite(z, "Mlp::jacobian input");
    Cache cache;
    forward_batch(z, &cache);
    std::vector<Matrix> T0(static_cast<std::size_t>(input_dim_));
    for (Index a = 0; a < input_dim_; ++a) {
        Matrix e = Matrix::Zero(input_dim_, 1);
        e(a, 0) = 1.0;
        T0[static_cast<std::size_t>(a)] = std::move(e);
    }
    auto T = tangent_batch(cache, T0);
    Matrix J(output_dim_, input_dim_);
    for (Index a = 0; a < input_dim_; ++a) J.col(a) = T[static_cast<std::size_t>(a)].col(0);
    return J;
}

std::vector<Matrix> Mlp::jacobian_dz(const Vector& z) const {
    require(z.size() == input_dim_, "Mlp::jacobian_dz: input dimension mismatch");
    check_finite(z, "Mlp::jacobian_dz input");
    Cache cache;
    forward_batch(z, &cache);
    std::vector<Matrix> T0(static_cast<std::size_t>(input_dim_));
    for (Index a = 0; a < input_dim_; ++a) {
        Matrix e = Matrix::Zero(input_dim_, 1);
        e(a, 0) = 1.0;
        T0[static_cast<std::size_t>(a)] = std::move(e);
    }
    TangentCache tc;
    tangent_batch(cache, T0, &tc);
    auto R = second_batch(cache, tc);
    // slice k holds dJ/dz_k: (i,j) entry = R[j][k] column 0, component i
    std::vector<Matrix> out(static_cast<std::size_t>(input_dim_));
    for (Index k = 0; k < input_dim_; ++k) {
        Matrix S(output_dim_, input_dim_);
        for (Index j = 0; j < input_dim_; ++j)
            S.col(j) = R[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)].col(0);
        out[static_cast<std::size_t>(k)] = std::move(S);
    }
    return out;
}

Vector Mlp::get_params() const {
    Vector flat(param_count());
    Index off = 0;
    for (const auto& l : layers_) {
        for (Index i = 0; i < l.W.rows(); ++i)
            for (Index j = 0; j < l.W.cols(); ++j) flat[off++] = l.W(i, j);
        for (Index i = 0; i < l.b.size(); ++i) flat[off++] = l.b[i];
    }
    return flat;
}

void Mlp::set_params(const Vector& flat) {
    require(flat.size() == param_count(), "Mlp::set_params: size mismatch");
    Index off = 0;
    for (auto& l : layers_) {
        for (Index i = 0; i < l.W.rows(); ++i)
            for (Index j = 0; j < l.W.cols(); ++j) l.W(i, j) = flat[off++];
        for (Index i = 0; i < l.b.size(); ++i) l.b[i] = flat[off++];
    }
}

} // namespace latgeo
