#include "latgeo/geodesic.hpp"

#include "latgeo/adam.hpp"
#include "latgeo/threads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace latgeo {
namespace {

Vector midpoint_ts(int n) {
    Vector ts(n);
    for (int i = 1; i <= n; ++i) ts[i - 1] = (i - 0.5) / n;
    return ts;
}

std::vector<ParamBlock> curve_blocks(CurveNet& curve, MlpGrads& grads) {
    std::vector<ParamBlock> blocks;
    auto& layers = curve.net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        blocks.push_back({layers[l].W.data(), grads.dW[l].data(), layers[l].W.size()});
        blocks.push_back({layers[l].b.data(), grads.db[l].data(), layers[l].b.size()});
    }
    return blocks;
}

// Batched velocities (and optionally their cotangents) of a sampled curve
// under the smoothed pullback metric.
struct ObjectiveEval {
    double length = 0.0;
    double max_velocity = 0.0;
    Vector velocities;
    Matrix gz, gv; // dL/dz_i, dL/dv_i when requested
};

ObjectiveEval evaluate_objective(const Mlp& decoder, const Matrix& Z, const Matrix& V,
                                 const SmoothingConfig& cfg, bool with_grads) {
    const Index n = Z.cols();
    const Index nz = decoder.input_dim();
    const Index nx = decoder.output_dim();

    Mlp::Cache cache;
    decoder.forward_batch(Z, &cache);
    std::vector<Matrix> T0(static_cast<std::size_t>(nz));
    for (Index a = 0; a < nz; ++a) {
        Matrix e = Matrix::Zero(nz, n);
        e.row(a).setOnes();
        T0[static_cast<std::size_t>(a)] = std::move(e);
    }
    Mlp::TangentCache tc;
    auto T = decoder.tangent_batch(cache, T0, &tc);
    auto R = decoder.second_batch(cache, tc);

    ObjectiveEval out;
    out.velocities.resize(n);
    if (with_grads) {
        out.gz = Matrix::Zero(nz, n);
        out.gv = Matrix::Zero(nz, n);
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    parallel_for(n, [&](Index i) {
        Matrix J(nx, nz);
        for (Index a = 0; a < nz; ++a) J.col(a) = T[static_cast<std::size_t>(a)].col(i);
        std::vector<Matrix> dJ(static_cast<std::size_t>(nz));
        for (Index k = 0; k < nz; ++k) {
            Matrix S(nx, nz);
            for (Index j = 0; j < nz; ++j)
                S.col(j) = R[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)].col(i);
            dJ[static_cast<std::size_t>(k)] = std::move(S);
        }
        if (with_grads) {
            VelocityDerivs vd = smoothed_velocity_derivs(J, dJ, V.col(i), cfg);
            out.velocities[i] = vd.phi;
            out.gz.col(i) = inv_n * vd.dphi_dz;
            out.gv.col(i) = inv_n * vd.dphi_dv;
        } else {
            out.velocities[i] = smoothed_velocity_value(J, V.col(i), cfg);
        }
    });

    out.length = out.velocities.sum() * inv_n;
    out.max_velocity = out.velocities.maxCoeff();
    return out;
}

GeodesicResult make_result(const Vector& z0, const Vector& z1, const Vector& ts, const Matrix& Z,
                           const ObjectiveEval& eval, double lambda_phi) {
    GeodesicResult r;
    r.z0 = z0;
    r.z1 = z1;
    r.ts = ts;
    r.path = Z.transpose();
    r.velocities = eval.velocities;
    r.length = eval.length;
    r.euclidean = (z1 - z0).norm();
    r.validation = eval.length + lambda_phi * eval.max_velocity;
    return r;
}

// piecewise-linear interpolation over knots [0, ts..., 1]
Vector interp_knots(const Vector& ts, const Vector& values, double v_start, double v_end,
                    double t) {
    const Index n = ts.size();
    if (t <= ts[0]) {
        const double w = ts[0] > 0 ? t / ts[0] : 1.0;
        return Vector::Constant(1, v_start + w * (values[0] - v_start));
    }
    if (t >= ts[n - 1]) {
        const double span = 1.0 - ts[n - 1];
        const double w = span > 0 ? (t - ts[n - 1]) / span : 1.0;
        return Vector::Constant(1, values[n - 1] + w * (v_end - values[n - 1]));
    }
    Index hi = 1;
    while (ts[hi] < t) ++hi;
    const double w = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
    return Vector::Constant(1, values[hi - 1] + w * (values[hi] - values[hi - 1]));
}

} // namespace

void GeodesicConfig::validate() const {
    require(n >= 2, "GeodesicConfig: need at least two sample points");
    require(learning_rate > 0, "GeodesicConfig: learning rate must be positive");
    require(max_iters >= 0 && patience >= 1, "GeodesicConfig: bad iteration limits");
    require(lambda_s >= 0, "GeodesicConfig: lambda_s must be nonnegative");
    require(lambda_phi >= 0, "GeodesicConfig: lambda_phi must be nonnegative");
    require(pretrain_curves >= 1, "GeodesicConfig: need at least one pretraining curve");
    require(bezier_control_count >= 2, "GeodesicConfig: K~ must be at least 2");
    require(pretrain_iters >= 0, "GeodesicConfig: pretrain iterations must be nonnegative");
    require(curve_width >= 1 && curve_hidden >= 1, "GeodesicConfig: bad curve net shape");
}

GeodesicResult straight_line_result(const Mlp& decoder, const Vector& z0, const Vector& z1,
                                    const GeodesicConfig& cfg) {
    cfg.validate();
    const Vector ts = midpoint_ts(cfg.n);
    const Index nz = z0.size();
    Matrix Z(nz, cfg.n), V(nz, cfg.n);
    const Vector diff = z1 - z0;
    for (Index i = 0; i < cfg.n; ++i) {
        Z.col(i) = z0 + ts[i] * diff;
        V.col(i) = diff;
    }
    const SmoothingConfig sm = cfg.smoothing();
    ObjectiveEval eval = evaluate_objective(decoder, Z, V, sm, false);
    GeodesicResult r = make_result(z0, z1, ts, Z, eval, cfg.lambda_phi);
    r.straight_length = r.length;
    return r;
}

double pretrain(CurveNet& curve, const std::function<Vector(double)>& target, int fit_iters,
                const Mlp& decoder, const GeodesicConfig& cfg) {
    const Index nz = curve.z0.size();
    const Vector ts = midpoint_ts(cfg.n);
    Matrix targets(nz, cfg.n);
    for (Index i = 0; i < cfg.n; ++i) targets.col(i) = target(ts[i]);

    MlpGrads grads;
    grads.resize_like(curve.net);
    auto blocks = curve_blocks(curve, grads);
    std::vector<Index> sizes;
    for (const auto& b : blocks) sizes.push_back(b.size);
    Adam opt(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}, sizes);

    CurveBatch batch;
    const double inv_n = 1.0 / static_cast<double>(cfg.n);
    for (int iter = 0; iter < fit_iters; ++iter) {
        curve_eval_batch(curve, ts, batch);
        Matrix resid = batch.Z - targets;
        const double loss = resid.squaredNorm() * inv_n;
        if (!std::isfinite(loss)) throw NumericError("pretrain: non-finite fit loss");
        Matrix gz = 2.0 * inv_n * resid;
        Matrix gv = Matrix::Zero(nz, cfg.n);
        grads.set_zero();
        curve_backward_batch(curve, batch, gz, gv, grads);
        opt.step(blocks);
    }

    curve_eval_batch(curve, ts, batch);
    ObjectiveEval eval = evaluate_objective(decoder, batch.Z, batch.V, cfg.smoothing(), false);
    return eval.length + cfg.lambda_phi * eval.max_velocity;
}

GeodesicResult optimize_geodesic(const Mlp& decoder, const Vector& z0, const Vector& z1,
                                 const GeodesicConfig& cfg) {
    cfg.validate();
    require(z0.size() == decoder.input_dim() && z1.size() == decoder.input_dim(),
            "optimize_geodesic: endpoint dimension mismatch");
    check_finite(z0, "optimize_geodesic z0");
    check_finite(z1, "optimize_geodesic z1");

    GeodesicResult straight = straight_line_result(decoder, z0, z1, cfg);
    if ((z1 - z0).norm() == 0.0) return straight; // constant path, length 0

    Rng root(cfg.rng_seed);
    const Vector ts = midpoint_ts(cfg.n);
    const SmoothingConfig sm = cfg.smoothing();

    // Bezier pretraining: fit one candidate per random curve, keep the best
    // validation value (ties resolved by candidate order).
    CurveNet best_curve;
    double best_pretrain_val = std::numeric_limits<double>::infinity();
    for (int c = 0; c < cfg.pretrain_curves; ++c) {
        Rng bez_rng = root.substream("bezier").substream(static_cast<std::uint64_t>(c));
        Rng net_rng = root.substream("curvenet").substream(static_cast<std::uint64_t>(c));
        BezierCurve bez = bezier_sample(z0, z1, cfg.bezier_control_count, bez_rng);
        CurveNet cand = make_curve_net(z0, z1, cfg.curve_width, cfg.curve_hidden, net_rng);
        const double val =
            pretrain(cand, [&](double t) { return bez.eval(t); }, cfg.pretrain_iters, decoder, cfg);
        if (val < best_pretrain_val) {
            best_pretrain_val = val;
            best_curve = std::move(cand);
        }
    }

    CurveNet curve = std::move(best_curve);
    MlpGrads grads;
    grads.resize_like(curve.net);
    auto blocks = curve_blocks(curve, grads);
    std::vector<Index> sizes;
    for (const auto& b : blocks) sizes.push_back(b.size);
    Adam opt(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}, sizes);

    GeodesicResult best;
    double best_val = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    std::vector<double> trace;
    trace.reserve(static_cast<std::size_t>(cfg.max_iters));

    CurveBatch batch;
    int iter = 0;
    for (; iter < cfg.max_iters; ++iter) {
        curve_eval_batch(curve, ts, batch);
        ObjectiveEval eval = evaluate_objective(decoder, batch.Z, batch.V, sm, true);
        if (!std::isfinite(eval.length))
            throw NumericError("optimize_geodesic: non-finite objective at iteration " +
                               std::to_string(iter));
        trace.push_back(eval.length);
        const double val = eval.length + cfg.lambda_phi * eval.max_velocity;
        if (val < best_val) {
            best_val = val;
            best = make_result(z0, z1, ts, batch.Z, eval, cfg.lambda_phi);
            since_improvement = 0;
        } else if (++since_improvement >= cfg.patience) {
            ++iter;
            break;
        }
        grads.set_zero();
        curve_backward_batch(curve, batch, eval.gz, eval.gv, grads);
        opt.step(blocks);
    }

    // The straight segment always competes: keep it when it validates better
    // or when the optimised curve somehow ended up longer.
    GeodesicResult final_result;
    if (best_val < straight.validation && best.length <= straight.length) {
        final_result = std::move(best);
    } else {
        final_result = straight;
    }
    final_result.straight_length = straight.length;
    final_result.iterations = iter;
    final_result.trace = std::move(trace);
    final_result.improved_on_straight = final_result.length < straight.length;
    return final_result;
}

GeodesicResult optimize_geodesic(const IwaeModel& model, const Vector& z0, const Vector& z1,
                                 const GeodesicConfig& cfg) {
    return optimize_geodesic(model.decoder, z0, z1, cfg);
}

InterpolationFrames interpolate_and_decode(const Mlp& decoder, const GeodesicResult& result,
                                           int frames, const SmoothingConfig* smoothing) {
    require(frames >= 2, "interpolate_and_decode: need at least two frames");
    const Index nz = result.z0.size();
    const Index n = result.ts.size();
    InterpolationFrames out;
    out.geo_latents.resize(frames, nz);
    out.straight_latents.resize(frames, nz);
    out.geo_velocities.resize(frames);
    out.straight_velocities.resize(frames);

    SmoothingConfig sm = smoothing ? *smoothing : SmoothingConfig{};
    const Vector diff = result.z1 - result.z0;
    for (int f = 0; f < frames; ++f) {
        const double t = static_cast<double>(f) / static_cast<double>(frames - 1);
        // straight counterpart
        out.straight_latents.row(f) = (result.z0 + t * diff).transpose();
        // optimised path with endpoint padding
        Vector z(nz);
        if (t <= result.ts[0]) {
            const double w = result.ts[0] > 0 ? t / result.ts[0] : 1.0;
            z = result.z0 + w * (result.path.row(0).transpose() - result.z0).eval();
        } else if (t >= result.ts[n - 1]) {
            const double span = 1.0 - result.ts[n - 1];
            const double w = span > 0 ? (t - result.ts[n - 1]) / span : 1.0;
            z = result.path.row(n - 1).transpose() +
                w * (result.z1 - result.path.row(n - 1).transpose()).eval();
        } else {
            Index hi = 1;
            while (result.ts[hi] < t) ++hi;
            const double w = (t - result.ts[hi - 1]) / (result.ts[hi] - result.ts[hi - 1]);
            z = ((1.0 - w) * result.path.row(hi - 1) + w * result.path.row(hi)).transpose();
        }
        out.geo_latents.row(f) = z.transpose();
        out.geo_velocities[f] =
            interp_knots(result.ts, result.velocities, result.velocities[0],
                         result.velocities[n - 1], t)[0];
        out.straight_velocities[f] =
            smoothed_velocity_value(decoder.jacobian(out.straight_latents.row(f).transpose()),
                                    diff, sm);
    }

    out.geo_decoded.resize(frames, decoder.output_dim());
    out.straight_decoded.resize(frames, decoder.output_dim());
    for (int f = 0; f < frames; ++f) {
        out.geo_decoded.row(f) = decoder.forward(out.geo_latents.row(f).transpose()).transpose();
        out.straight_decoded.row(f) =
            decoder.forward(out.straight_latents.row(f).transpose()).transpose();
    }
    return out;
}

void write_geodesic_csv(const std::filesystem::path& path, const GeodesicResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.precision(17);
    out << 't';
    for (Index j = 0; j < result.z0.size(); ++j) out << ",z_" << (j + 1);
    out << ",velocity\n";
    for (Index i = 0; i < result.ts.size(); ++i) {
        out << result.ts[i];
        for (Index j = 0; j < result.path.cols(); ++j) out << ',' << result.path(i, j);
        out << ',' << result.velocities[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Json geodesic_summary(const GeodesicResult& result, const GeodesicConfig& cfg) {
    return Json{{"length", result.length},
                {"straight_length", result.straight_length},
                {"euclidean", result.euclidean},
                {"validation", result.validation},
                {"iterations", result.iterations},
                {"improved_on_straight", result.improved_on_straight},
                {"config",
                 {{"n", cfg.n},
                  {"learning_rate", cfg.learning_rate},
                  {"max_iters", cfg.max_iters},
                  {"patience", cfg.patience},
                  {"lambda_s", cfg.lambda_s},
                  {"rank", cfg.rank},
                  {"lambda_phi", cfg.lambda_phi},
                  {"pretrain_curves", cfg.pretrain_curves},
                  {"bezier_control_count", cfg.bezier_control_count},
                  {"pretrain_iters", cfg.pretrain_iters},
                  {"seed", cfg.rng_seed}}}};
}

} // namespace latgeo
