#include "latgeo/iwae.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace latgeo {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;
constexpr double kSigmaFloor = 1e-12;
constexpr double kBernoulliClamp = 1e-7;

Mlp single_layer(Index in, Index out, Activation act, Rng& rng) {
    return Mlp::random({in, out}, {act}, rng);
}

} // namespace

std::string_view likelihood_name(Likelihood lik) {
    return lik == Likelihood::GaussianGlobalVar ? "gaussian" : "bernoulli";
}

Likelihood likelihood_from_name(std::string_view name) {
    if (name == "gaussian") return Likelihood::GaussianGlobalVar;
    if (name == "bernoulli") return Likelihood::Bernoulli;
    throw std::invalid_argument("unknown likelihood '" + std::string(name) + "'");
}

void IwaeModel::validate() const {
    require(encoder_mean.input_dim() == encoder_trunk.output_dim() &&
                encoder_std.input_dim() == encoder_trunk.output_dim(),
            "encoder heads do not match the trunk width");
    require(encoder_mean.output_dim() == decoder.input_dim() &&
                encoder_std.output_dim() == decoder.input_dim(),
            "encoder heads do not match the latent dimension");
    require(decoder.output_dim() == encoder_trunk.input_dim(),
            "decoder output does not match the data dimension");
    check_finite(log_var, "global log-variance");
}

std::pair<Vector, Vector> IwaeModel::encode(const Vector& x) const {
    require(x.size() == data_dim(), "encode: input dimension mismatch");
    Vector h = encoder_trunk.forward(x);
    Vector mu = encoder_mean.forward(h);
    Vector sigma = encoder_std.forward(h).array() + kSigmaFloor;
    return {mu, sigma};
}

Vector IwaeModel::decode_mean(const Vector& z) const {
    return decoder.forward(z);
}

IwaeModel make_iwae_model(Index nx, Index nz, Index width, int hidden, Activation act,
                          Likelihood lik, Rng& rng) {
    require(hidden >= 1, "need at least one hidden layer");
    std::vector<Index> enc_dims{nx};
    std::vector<Activation> enc_acts;
    for (int i = 0; i < hidden; ++i) {
        enc_dims.push_back(width);
        enc_acts.push_back(act);
    }
    std::vector<Index> dec_dims{nz};
    std::vector<Activation> dec_acts;
    for (int i = 0; i < hidden; ++i) {
        dec_dims.push_back(width);
        dec_acts.push_back(act);
    }
    dec_dims.push_back(nx);
    dec_acts.push_back(lik == Likelihood::GaussianGlobalVar ? Activation::Softplus
                                                            : Activation::Sigmoid);
    IwaeModel m;
    m.encoder_trunk = Mlp::random(enc_dims, enc_acts, rng);
    m.encoder_mean = single_layer(width, nz, Activation::Linear, rng);
    m.encoder_std = single_layer(width, nz, Activation::Softplus, rng);
    m.decoder = Mlp::random(dec_dims, dec_acts, rng);
    m.likelihood = lik;
    m.validate();
    return m;
}

Mlp make_residual_decoder(Index nz, Index nx, Index width, int blocks, Activation act,
                          Likelihood lik, Rng& rng) {
    std::vector<Index> dims{nz, width};
    std::vector<Activation> acts{act};
    for (int i = 0; i < blocks; ++i) {
        dims.push_back(width);
        acts.push_back(act);
    }
    dims.push_back(nx);
    acts.push_back(lik == Likelihood::GaussianGlobalVar ? Activation::Softplus
                                                        : Activation::Sigmoid);
    Mlp net = Mlp::random(dims, acts, rng);
    for (int i = 0; i < blocks; ++i) net.layers()[static_cast<std::size_t>(1 + i)].residual = true;
    return net;
}

Vector reparam_sample(const Vector& mu, const Vector& sigma, const Vector& eps) {
    require(mu.size() == sigma.size() && mu.size() == eps.size(),
            "reparam_sample: shape mismatch");
    return mu.array() + sigma.array() * eps.array();
}

double log_prior(const Vector& z) {
    return -0.5 * static_cast<double>(z.size()) * kLog2Pi - 0.5 * z.squaredNorm();
}

double log_q(const Vector& z, const Vector& mu, const Vector& sigma) {
    require(z.size() == mu.size() && z.size() == sigma.size(), "log_q: shape mismatch");
    double out = -0.5 * static_cast<double>(z.size()) * kLog2Pi;
    for (Index j = 0; j < z.size(); ++j) {
        const double e = (z[j] - mu[j]) / sigma[j];
        out -= std::log(sigma[j]) + 0.5 * e * e;
    }
    return out;
}

double log_likelihood(const IwaeModel& model, const Vector& x, const Vector& z) {
    require(x.size() == model.data_dim(), "log_likelihood: x dimension mismatch");
    require(z.size() == model.latent_dim(), "log_likelihood: z dimension mismatch");
    Vector mean = model.decode_mean(z);
    if (model.likelihood == Likelihood::GaussianGlobalVar) {
        const double var = std::exp(model.log_var);
        const double n = static_cast<double>(x.size());
        return -0.5 * n * (kLog2Pi + model.log_var) - (x - mean).squaredNorm() / (2.0 * var);
    }
    double out = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0 && x[i] != 1.0)
            throw std::invalid_argument("Bernoulli targets must be exactly 0 or 1");
        const double m = std::clamp(mean[i], kBernoulliClamp, 1.0 - kBernoulliClamp);
        out += x[i] == 1.0 ? std::log(m) : std::log1p(-m);
    }
    return out;
}

double iwae_estimate(const IwaeModel& model, const Vector& x, const Matrix& eps_draws) {
    require(eps_draws.rows() == model.latent_dim() && eps_draws.cols() >= 1,
            "iwae_estimate: need at least one eps draw of latent dimension");
    auto [mu, sigma] = model.encode(x);
    const Index K = eps_draws.cols();
    Vector lw(K);
    for (Index k = 0; k < K; ++k) {
        Vector z = reparam_sample(mu, sigma, eps_draws.col(k));
        lw[k] = log_likelihood(model, x, z) + log_prior(z) - log_q(z, mu, sigma);
    }
    const double m = lw.maxCoeff();
    return m + std::log((lw.array() - m).exp().sum()) - std::log(static_cast<double>(K));
}

double elbo_estimate(const IwaeModel& model, const Vector& x, const Vector& eps) {
    return iwae_estimate(model, x, eps);
}

void TrainConfig::validate() const {
    require(k >= 1, "TrainConfig: K must be at least 1");
    require(batch_size >= 1, "TrainConfig: batch size must be at least 1");
    require(epochs >= 0, "TrainConfig: epochs must be nonnegative");
    require(learning_rate > 0, "TrainConfig: learning rate must be positive");
}

void IwaeGrads::resize_like(const IwaeModel& model) {
    encoder_trunk.resize_like(model.encoder_trunk);
    encoder_mean.resize_like(model.encoder_mean);
    encoder_std.resize_like(model.encoder_std);
    decoder.resize_like(model.decoder);
    d_log_var = 0.0;
}

void IwaeGrads::set_zero() {
    encoder_trunk.set_zero();
    encoder_mean.set_zero();
    encoder_std.set_zero();
    decoder.set_zero();
    d_log_var = 0.0;
}

double iwae_batch_bound(const IwaeModel& model, const Matrix& X, const Matrix& eps, Index K,
                        IwaeGrads* grads, double grad_scale) {
    const Index B = X.cols();
    const Index nz = model.latent_dim();
    const Index nx = model.data_dim();
    require(K >= 1 && eps.rows() == nz && eps.cols() == B * K,
            "iwae_batch_bound: eps must be latent_dim x (batch*K)");
    require(X.rows() == nx, "iwae_batch_bound: data dimension mismatch");

    Mlp::Cache c_trunk, c_mean, c_std, c_dec;
    Matrix H = model.encoder_trunk.forward_batch(X, &c_trunk);
    Matrix MU = model.encoder_mean.forward_batch(H, &c_mean);
    Matrix SIG = model.encoder_std.forward_batch(H, &c_std).array() + kSigmaFloor;

    Matrix Z(nz, B * K);
    for (Index b = 0; b < B; ++b)
        for (Index k = 0; k < K; ++k) {
            const Index c = b * K + k;
            Z.col(c) = MU.col(b).array() + SIG.col(b).array() * eps.col(c).array();
        }

    Matrix M = model.decoder.forward_batch(Z, &c_dec);

    // log importance weights, evaluated column-wise in log space
    Vector lw(B * K);
    const bool gaussian = model.likelihood == Likelihood::GaussianGlobalVar;
    const double var = std::exp(model.log_var);
    Vector log_sig_sums(B);
    for (Index b = 0; b < B; ++b)
        log_sig_sums[b] = SIG.col(b).array().log().sum();
    for (Index b = 0; b < B; ++b) {
        for (Index k = 0; k < K; ++k) {
            const Index c = b * K + k;
            double lnp;
            if (gaussian) {
                lnp = -0.5 * static_cast<double>(nx) * (kLog2Pi + model.log_var) -
                      (X.col(b) - M.col(c)).squaredNorm() / (2.0 * var);
            } else {
                lnp = 0.0;
                for (Index i = 0; i < nx; ++i) {
                    const double m = std::clamp(M(i, c), kBernoulliClamp, 1.0 - kBernoulliClamp);
                    lnp += X(i, b) == 1.0 ? std::log(m) : std::log1p(-m);
                }
            }
            const double lnprior =
                -0.5 * static_cast<double>(nz) * kLog2Pi - 0.5 * Z.col(c).squaredNorm();
            const double lnq = -0.5 * static_cast<double>(nz) * kLog2Pi - log_sig_sums[b] -
                               0.5 * eps.col(c).squaredNorm();
            lw[c] = lnp + lnprior - lnq;
        }
    }

    // per-sample log-mean-exp and softmax weights
    double bound = 0.0;
    Vector what(B * K);
    for (Index b = 0; b < B; ++b) {
        const auto seg = lw.segment(b * K, K);
        const double m = seg.maxCoeff();
        const double se = (seg.array() - m).exp().sum();
        bound += m + std::log(se) - std::log(static_cast<double>(K));
        what.segment(b * K, K) = (seg.array() - m).exp() / se;
    }
    bound /= static_cast<double>(B);

    if (!grads) return bound;

    const double scale = grad_scale / static_cast<double>(B);

    // dL/d(decoder mean)
    Matrix dM(nx, B * K);
    double d_log_var = 0.0;
    for (Index b = 0; b < B; ++b) {
        for (Index k = 0; k < K; ++k) {
            const Index c = b * K + k;
            const double wsc = what[c] * scale;
            if (gaussian) {
                dM.col(c) = wsc * (X.col(b) - M.col(c)) / var;
                d_log_var +=
                    wsc * (-0.5 * static_cast<double>(nx) +
                           (X.col(b) - M.col(c)).squaredNorm() / (2.0 * var));
            } else {
                for (Index i = 0; i < nx; ++i) {
                    const double m = M(i, c);
                    if (m <= kBernoulliClamp || m >= 1.0 - kBernoulliClamp) {
                        dM(i, c) = 0.0; // clamped region: flat in the mean
                    } else {
                        dM(i, c) = wsc * (X(i, b) == 1.0 ? 1.0 / m : -1.0 / (1.0 - m));
                    }
                }
            }
        }
    }
    grads->d_log_var += d_log_var;

    Matrix GZ;
    model.decoder.backward_batch(c_dec, dM, grads->decoder, &GZ);

    // prior term through z
    for (Index c = 0; c < B * K; ++c) GZ.col(c) -= (what[c] * scale) * Z.col(c);

    // collapse draws onto the posterior parameters
    Matrix GMU = Matrix::Zero(nz, B);
    Matrix GSIG = Matrix::Zero(nz, B);
    for (Index b = 0; b < B; ++b) {
        for (Index k = 0; k < K; ++k) {
            const Index c = b * K + k;
            GMU.col(b) += GZ.col(c);
            GSIG.col(b) += GZ.col(c).cwiseProduct(eps.col(c));
        }
        GSIG.col(b) += scale * SIG.col(b).cwiseInverse(); // -d ln q / d sigma
    }

    Matrix Gh_std, Gh_mean;
    model.encoder_std.backward_batch(c_std, GSIG, grads->encoder_std, &Gh_std);
    model.encoder_mean.backward_batch(c_mean, GMU, grads->encoder_mean, &Gh_mean);
    Matrix Gh = Gh_std + Gh_mean;
    model.encoder_trunk.backward_batch(c_trunk, Gh, grads->encoder_trunk, nullptr);
    return bound;
}

namespace {

void collect_blocks(Mlp& net, MlpGrads& grads, std::vector<ParamBlock>& blocks) {
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        blocks.push_back({layers[l].W.data(), grads.dW[l].data(), layers[l].W.size()});
        blocks.push_back({layers[l].b.data(), grads.db[l].data(), layers[l].b.size()});
    }
}

} // namespace

TrainResult train(IwaeModel& model, const Matrix& samples_by_row, const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    const Index N = samples_by_row.rows();
    require(N >= 1, "train: dataset is empty");
    require(samples_by_row.cols() == model.data_dim(), "train: data dimension mismatch");
    if (model.likelihood == Likelihood::Bernoulli) {
        for (Index i = 0; i < samples_by_row.size(); ++i) {
            const double v = samples_by_row.data()[i];
            if (v != 0.0 && v != 1.0)
                throw std::invalid_argument("Bernoulli training data must be binary");
        }
    }

    const Matrix X = samples_by_row.transpose();
    const Index nz = model.latent_dim();

    IwaeGrads grads;
    grads.resize_like(model);

    std::vector<ParamBlock> blocks;
    collect_blocks(model.encoder_trunk, grads.encoder_trunk, blocks);
    collect_blocks(model.encoder_mean, grads.encoder_mean, blocks);
    collect_blocks(model.encoder_std, grads.encoder_std, blocks);
    collect_blocks(model.decoder, grads.decoder, blocks);
    if (model.likelihood == Likelihood::GaussianGlobalVar)
        blocks.push_back({&model.log_var, &grads.d_log_var, 1});

    std::vector<Index> sizes;
    sizes.reserve(blocks.size());
    for (const auto& b : blocks) sizes.push_back(b.size);
    Adam opt(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8}, sizes);

    Rng root(cfg.rng_seed);
    Rng shuffle_rng = root.substream("shuffle");
    Rng eps_rng = root.substream("eps");

    TrainResult result;
    result.trace.reserve(static_cast<std::size_t>(cfg.epochs));
    Matrix Xb, Eps;
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto perm = shuffle_rng.permutation(N);
        double epoch_bound = 0.0;
        Index batch_index = 0;
        for (Index start = 0; start < N; start += cfg.batch_size, ++batch_index) {
            const Index B = std::min(cfg.batch_size, N - start);
            Xb.resize(X.rows(), B);
            for (Index i = 0; i < B; ++i)
                Xb.col(i) = X.col(perm[static_cast<std::size_t>(start + i)]);
            Eps = eps_rng.normal_matrix(nz, B * cfg.k);
            grads.set_zero();
            const double bound = iwae_batch_bound(model, Xb, Eps, cfg.k, &grads, -1.0);
            if (!std::isfinite(bound))
                throw NumericError("non-finite objective at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(batch_index));
            opt.step(blocks);
            epoch_bound += bound * static_cast<double>(B);
        }
        result.trace.push_back(epoch_bound / static_cast<double>(N));
    }
    return result;
}

void save_checkpoint(const std::filesystem::path& dir, const IwaeModel& model,
                     const Json& extra) {
    std::filesystem::create_directories(dir);
    save_mlp(dir / "encoder_trunk.mlp", model.encoder_trunk);
    save_mlp(dir / "encoder_mean.mlp", model.encoder_mean);
    save_mlp(dir / "encoder_std.mlp", model.encoder_std);
    save_mlp(dir / "decoder.mlp", model.decoder);
    Json meta = {{"format", "latgeo-checkpoint"},
                 {"version", 1},
                 {"likelihood", std::string(likelihood_name(model.likelihood))},
                 {"nz", model.latent_dim()},
                 {"nx", model.data_dim()},
                 {"log_var", model.log_var}};
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    write_text_file(dir / "model.json", meta.dump(2) + "\n");
}

IwaeModel load_checkpoint(const std::filesystem::path& dir, Json* meta_out) {
    Json meta;
    try {
        meta = Json::parse(read_text_file(dir / "model.json"));
    } catch (const Json::parse_error& e) {
        throw IoError("malformed checkpoint metadata in " + dir.string() + ": " + e.what());
    }
    if (meta.value("format", "") != "latgeo-checkpoint")
        throw IoError("not a checkpoint directory: " + dir.string());
    IwaeModel m;
    m.encoder_trunk = load_mlp(dir / "encoder_trunk.mlp");
    m.encoder_mean = load_mlp(dir / "encoder_mean.mlp");
    m.encoder_std = load_mlp(dir / "encoder_std.mlp");
    m.decoder = load_mlp(dir / "decoder.mlp");
    m.likelihood = likelihood_from_name(meta.at("likelihood").get<std::string>());
    m.log_var = meta.at("log_var").get<double>();
    m.validate();
    if (meta.at("nz").get<Index>() != m.latent_dim() ||
        meta.at("nx").get<Index>() != m.data_dim())
        throw IoError("checkpoint metadata disagrees with model shapes in " + dir.string());
    if (meta_out) *meta_out = meta;
    return m;
}

} // namespace latgeo
