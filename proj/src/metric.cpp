#include "latgeo/metric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace latgeo {
namespace {

constexpr double kPsdTolerance = -1e-9;

// Eigendecomposition of a symmetric PSD matrix with non-increasing values;
// small negative eigenvalues within tolerance are clamped to zero.
void psd_eig(const Matrix& G, Matrix& U, Vector& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(G);
    if (eig.info() != Eigen::Success) throw NumericError("metric eigendecomposition failed");
    const Index n = G.rows();
    U.resize(n, n);
    s.resize(n);
    for (Index i = 0; i < n; ++i) {
        const Index src = n - 1 - i; // ascending -> descending
        double v = eig.eigenvalues()[src];
        if (v < kPsdTolerance * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff()))
            throw NumericError("metric tensor is not positive semidefinite");
        s[i] = std::max(v, 0.0);
        U.col(i) = eig.eigenvectors().col(src);
    }
}

double shrink(double s, double lambda) {
    const double denom = s * s + lambda;
    if (denom == 0.0) return 0.0;
    return s * s * s / denom;
}

double shrink_d1(double s, double lambda) {
    const double denom = s * s + lambda;
    if (denom == 0.0) return lambda == 0.0 ? 1.0 : 0.0;
    return s * s * (s * s + 3.0 * lambda) / (denom * denom);
}

} // namespace

void SmoothingConfig::validate(Index nz) const {
    require(lambda_s >= 0.0, "smoothing lambda_s must be nonnegative");
    require(rank >= 0 && rank <= nz, "smoothing rank out of bounds");
}

void MetricTensor::ensure_svd() {
    if (U && singular_values) return;
    Matrix u;
    Vector s;
    psd_eig(G, u, s);
    U = std::move(u);
    singular_values = std::move(s);
}

MetricTensor metric_tensor(const Mlp& decoder, const Vector& z, const SmoothingConfig* smoothing) {
    Matrix J = decoder.jacobian(z);
    MetricTensor m;
    m.G.noalias() = J.transpose() * J;
    m.G = 0.5 * (m.G + m.G.transpose()).eval();
    if (smoothing) return smooth_metric(m, *smoothing);
    return m;
}

MetricTensor smooth_metric(const MetricTensor& metric, const SmoothingConfig& cfg) {
    const Index nz = metric.dim();
    cfg.validate(nz);
    MetricTensor in = metric;
    in.ensure_svd();
    const Matrix& U = *in.U;
    const Vector& s = *in.singular_values;
    const Index r = cfg.effective_rank(nz);
    Vector shat = Vector::Zero(nz);
    for (Index i = 0; i < r; ++i) shat[i] = shrink(s[i], cfg.lambda_s);
    MetricTensor out;
    out.G.noalias() = U * shat.asDiagonal() * U.transpose();
    out.G = 0.5 * (out.G + out.G.transpose()).eval();
    out.U = U;
    out.singular_values = shat;
    return out;
}

double velocity(const Mlp& decoder, const Vector& z, const Vector& dz,
                const SmoothingConfig* smoothing) {
    require(dz.size() == z.size(), "velocity: dz dimension mismatch");
    MetricTensor m = metric_tensor(decoder, z, smoothing);
    const double q = dz.dot(m.G * dz);
    if (q < kPsdTolerance * std::max(1.0, dz.squaredNorm()))
        throw NumericError("velocity: negative inner product (broken metric)");
    return std::sqrt(std::max(q, 0.0));
}

double curve_length(const Mlp& decoder, const CurveFn& curve, int n,
                    const SmoothingConfig* smoothing) {
    require(n >= 2, "curve_length needs at least two sample points");
    double total = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double t = (i - 0.5) / n;
        auto [z, dz] = curve(t);
        total += velocity(decoder, z, dz, smoothing);
    }
    return total / n;
}

double magnification_factor(const Mlp& decoder, const Vector& z) {
    MetricTensor m = metric_tensor(decoder, z);
    const double det = m.G.determinant();
    if (det < -1e-9 * std::max(1.0, m.G.cwiseAbs().maxCoeff()))
        throw NumericError("magnification_factor: negative determinant (broken metric)");
    return std::sqrt(std::max(det, 0.0));
}

double smoothed_velocity_value(const Matrix& J, const Vector& v, const SmoothingConfig& cfg) {
    const Index nz = J.cols();
    cfg.validate(nz);
    if (cfg.is_identity(nz)) return (J * v).norm();
    Matrix G = J.transpose() * J;
    G = 0.5 * (G + G.transpose()).eval();
    Matrix U;
    Vector s;
    psd_eig(G, U, s);
    const Index r = cfg.effective_rank(nz);
    const Vector w = U.transpose() * v;
    double phi2 = 0.0;
    for (Index i = 0; i < r; ++i) phi2 += shrink(s[i], cfg.lambda_s) * w[i] * w[i];
    return std::sqrt(std::max(phi2, 0.0));
}

VelocityDerivs smoothed_velocity_derivs(const Matrix& J, const std::vector<Matrix>& dJ,
                                        const Vector& v, const SmoothingConfig& cfg) {
    const Index nz = J.cols();
    cfg.validate(nz);
    Matrix G = J.transpose() * J;
    G = 0.5 * (G + G.transpose()).eval();
    Matrix U;
    Vector s;
    psd_eig(G, U, s);
    const Index r = cfg.effective_rank(nz);

    Vector shat = Vector::Zero(nz);
    Vector sd1 = Vector::Zero(nz);
    for (Index i = 0; i < r; ++i) {
        shat[i] = shrink(s[i], cfg.lambda_s);
        sd1[i] = shrink_d1(s[i], cfg.lambda_s);
    }

    const Vector w = U.transpose() * v;
    const double phi2 = (shat.array() * w.array().square()).sum();
    VelocityDerivs out;
    out.phi = std::sqrt(std::max(phi2, 0.0));
    out.dphi_dv = Vector::Zero(nz);
    out.dphi_dz = Vector::Zero(nz);
    if (out.phi <= 0.0) return out;

    out.dphi_dv = U * (shat.array() * w.array()).matrix() / out.phi;

    // Divided-difference table of the shrink map over the spectrum; the
    // diagonal uses the derivative, near-coincident values fall back to it.
    const double gap_tol = 1e-12 * std::max(1.0, s.size() > 0 ? s[0] : 1.0);
    Matrix gamma(nz, nz);
    for (Index a = 0; a < nz; ++a) {
        for (Index b = 0; b <= a; ++b) {
            double g;
            if (a == b) {
                g = sd1[a];
            } else if (std::abs(s[a] - s[b]) > gap_tol) {
                g = (shat[a] - shat[b]) / (s[a] - s[b]);
            } else {
                g = 0.5 * (sd1[a] + sd1[b]);
            }
            gamma(a, b) = g;
            gamma(b, a) = g;
        }
    }
    Matrix S = U * (gamma.array() * (w * w.transpose()).array()).matrix() * U.transpose();
    Matrix C = J * S; // cotangent on the Jacobian
    for (Index k = 0; k < nz; ++k)
        out.dphi_dz[k] = C.cwiseProduct(dJ[static_cast<std::size_t>(k)]).sum() / out.phi;
    return out;
}

} // namespace latgeo
