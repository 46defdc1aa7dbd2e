#include "latgeo/curve.hpp"

#include <cmath>

namespace latgeo {
namespace {

constexpr double kDegenerateTol = 1e-8;

} // namespace

CurveNet make_curve_net(const Vector& z0, const Vector& z1, Index width, int hidden, Rng& rng) {
    require(z0.size() == z1.size(), "curve endpoints must share a dimension");
    require(z0.size() >= 1, "curve endpoints must be non-empty");
    check_finite(z0, "curve endpoint z0");
    check_finite(z1, "curve endpoint z1");
    std::vector<Index> dims{1};
    std::vector<Activation> acts;
    for (int i = 0; i < hidden; ++i) {
        dims.push_back(width);
        acts.push_back(Activation::Tanh);
    }
    dims.push_back(z0.size());
    acts.push_back(Activation::Linear);
    CurveNet c;
    c.net = Mlp::random(dims, acts, rng);
    c.z0 = z0;
    c.z1 = z1;
    c.zhat0 = Vector::Zero(z0.size());
    c.zhat1 = Vector::Zero(z0.size());
    return c;
}

void curve_eval_batch(CurveNet& curve, const Vector& ts, CurveBatch& out) {
    const Index n = ts.size();
    const Index nz = curve.z0.size();
    out.ts = ts;

    Matrix T(1, n + 2);
    for (Index i = 0; i < n; ++i) T(0, i) = ts[i];
    T(0, n) = 0.0;
    T(0, n + 1) = 1.0;

    Matrix Zhat = curve.net.forward_batch(T, &out.cache);
    std::vector<Matrix> T0{Matrix::Ones(1, n + 2)};
    auto tangents = curve.net.tangent_batch(out.cache, T0, &out.tc);
    const Matrix& Dhat = tangents[0];

    curve.zhat0 = Zhat.col(n);
    curve.zhat1 = Zhat.col(n + 1);

    out.A.resize(nz);
    out.B.resize(nz);
    out.degenerate.assign(static_cast<std::size_t>(nz), false);
    for (Index j = 0; j < nz; ++j) {
        const double d = curve.zhat0[j] - curve.zhat1[j];
        if (std::abs(d) < kDegenerateTol) {
            out.degenerate[static_cast<std::size_t>(j)] = true;
            out.A[j] = 1.0;
            out.B[j] = 0.0;
        } else {
            out.A[j] = (curve.z0[j] - curve.z1[j]) / d;
            out.B[j] = (curve.z0[j] * curve.zhat1[j] - curve.z1[j] * curve.zhat0[j]) / d;
        }
    }

    out.Z.resize(nz, n);
    out.V.resize(nz, n);
    for (Index j = 0; j < nz; ++j) {
        if (!out.degenerate[static_cast<std::size_t>(j)]) {
            out.Z.row(j) = out.A[j] * Zhat.row(j).head(n).array() - out.B[j];
            out.V.row(j) = out.A[j] * Dhat.row(j).head(n).array();
        } else {
            const double c0 = curve.z0[j] - curve.zhat0[j];
            const double c1 = curve.z1[j] - curve.zhat1[j];
            for (Index i = 0; i < n; ++i) {
                const double t = ts[i];
                out.Z(j, i) = Zhat(j, i) + (1.0 - t) * c0 + t * c1;
                out.V(j, i) = Dhat(j, i) + (c1 - c0);
            }
        }
    }
}

std::pair<Vector, Vector> curve_eval(const CurveNet& curve, double t) {
    require(t >= 0.0 && t <= 1.0, "curve parameter must lie in [0,1]");
    CurveNet tmp = curve;
    CurveBatch batch;
    Vector ts(1);
    ts[0] = t;
    curve_eval_batch(tmp, ts, batch);
    return {batch.Z.col(0), batch.V.col(0)};
}

void curve_backward_batch(const CurveNet& curve, const CurveBatch& batch, const Matrix& gz,
                          const Matrix& gv, MlpGrads& grads) {
    const Index n = batch.ts.size();
    const Index nz = curve.z0.size();
    const Matrix& Zhat = batch.cache.h.back();
    const Matrix& Dhat = batch.tc.t.back()[0];

    Matrix zhat_bar = Matrix::Zero(nz, n + 2);
    Matrix dhat_bar = Matrix::Zero(nz, n + 2);

    for (Index j = 0; j < nz; ++j) {
        if (!batch.degenerate[static_cast<std::size_t>(j)]) {
            const double u = curve.zhat0[j];
            const double v = curve.zhat1[j];
            const double D = u - v;
            const double dz = curve.z0[j] - curve.z1[j];
            // direct paths through zhat(t) and its tangent
            zhat_bar.row(j).head(n) = batch.A[j] * gz.row(j);
            dhat_bar.row(j).head(n) = batch.A[j] * gv.row(j);
            // paths through the normalisation coefficients
            double dL_dA = 0.0, dL_dB = 0.0;
            for (Index i = 0; i < n; ++i) {
                dL_dA += gz(j, i) * Zhat(j, i) + gv(j, i) * Dhat(j, i);
                dL_dB -= gz(j, i);
            }
            const double dA_du = -dz / (D * D);
            const double dA_dv = dz / (D * D);
            const double dB_du = v * (curve.z1[j] - curve.z0[j]) / (D * D);
            const double dB_dv = u * (curve.z0[j] - curve.z1[j]) / (D * D);
            zhat_bar(j, n) += dL_dA * dA_du + dL_dB * dB_du;
            zhat_bar(j, n + 1) += dL_dA * dA_dv + dL_dB * dB_dv;
        } else {
            zhat_bar.row(j).head(n) = gz.row(j);
            dhat_bar.row(j).head(n) = gv.row(j);
            for (Index i = 0; i < n; ++i) {
                const double t = batch.ts[i];
                zhat_bar(j, n) += -(1.0 - t) * gz(j, i) + gv(j, i);
                zhat_bar(j, n + 1) += -t * gz(j, i) - gv(j, i);
            }
        }
    }

    curve.net.tangent_backward_batch(batch.cache, batch.tc, 0, zhat_bar, dhat_bar, grads);
}

} // namespace latgeo
