#pragma once

#include "latgeo/adam.hpp"
#include "latgeo/common.hpp"
#include "latgeo/io.hpp"
#include "latgeo/mlp.hpp"
#include "latgeo/rng.hpp"

#include <filesystem>
#include <vector>

namespace latgeo {

enum class Likelihood { GaussianGlobalVar, Bernoulli };

std::string_view likelihood_name(Likelihood lik);
Likelihood likelihood_from_name(std::string_view name);

/// Importance-weighted autoencoder: diagonal-Gaussian inference model with a
/// shared trunk and separate mean (linear) and std (softplus) heads, plus a
/// decoder whose output layer doubles as the likelihood mean head. The
/// Gaussian likelihood carries one global log-variance shared across output
/// dimensions.
struct IwaeModel {
    Mlp encoder_trunk;
    Mlp encoder_mean;
    Mlp encoder_std;
    Mlp decoder;
    Likelihood likelihood = Likelihood::GaussianGlobalVar;
    double log_var = std::log(0.01);

    Index data_dim() const { return encoder_trunk.input_dim(); }
    Index latent_dim() const { return decoder.input_dim(); }

    void validate() const;

    /// Posterior parameters; sigma is strictly positive.
    std::pair<Vector, Vector> encode(const Vector& x) const;
    Vector decode_mean(const Vector& z) const;
};

/// Standard architecture used by the experiments: `hidden` fully connected
/// layers of width `width` with activation `act` on both encoder and decoder,
/// decoder mean head softplus (Gaussian) or sigmoid (Bernoulli).
IwaeModel make_iwae_model(Index nx, Index nz, Index width, int hidden, Activation act,
                          Likelihood lik, Rng& rng);

/// Decoder variant with identity-skip blocks: input layer nz->width, `blocks`
/// residual layers of the given width, then the likelihood mean head.
Mlp make_residual_decoder(Index nz, Index nx, Index width, int blocks, Activation act,
                          Likelihood lik, Rng& rng);

Vector reparam_sample(const Vector& mu, const Vector& sigma, const Vector& eps);

double log_prior(const Vector& z);
double log_q(const Vector& z, const Vector& mu, const Vector& sigma);
/// ln p(x|z); Bernoulli means are clamped to [1e-7, 1-1e-7] and Bernoulli
/// targets must be exactly 0 or 1.
double log_likelihood(const IwaeModel& model, const Vector& x, const Vector& z);

/// ln (1/K) sum_k w_k with K the number of eps columns. Log weights are
/// combined with max subtraction; no weight is ever exponentiated directly.
double iwae_estimate(const IwaeModel& model, const Vector& x, const Matrix& eps_draws);
/// Single-draw bound; identical to iwae_estimate with one column.
double elbo_estimate(const IwaeModel& model, const Vector& x, const Vector& eps);

struct TrainConfig {
    Index k = 1;
    double learning_rate = 1e-3;
    Index batch_size = 1;
    Index epochs = 1;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct IwaeGrads {
    MlpGrads encoder_trunk, encoder_mean, encoder_std, decoder;
    double d_log_var = 0.0;

    void resize_like(const IwaeModel& model);
    void set_zero();
};

/// Mean per-sample IWAE bound of one minibatch (samples as columns of X,
/// eps column b*K+k belongs to sample b) and its parameter gradients scaled
/// by `grad_scale` (pass -1 for a loss to minimise). The workhorse behind
/// train(); exposed so the gradients can be finite-difference checked.
double iwae_batch_bound(const IwaeModel& model, const Matrix& X, const Matrix& eps, Index K,
                        IwaeGrads* grads = nullptr, double grad_scale = 1.0);

struct TrainResult {
    std::vector<double> trace; // per-epoch mean bound per sample
};

/// Minibatch Adam ascent on the K-sample bound. Deterministic given the
/// config seed; raises NumericError with epoch/batch diagnostics if the
/// objective turns non-finite.
TrainResult train(IwaeModel& model, const Matrix& samples_by_row, const TrainConfig& cfg);

/// Checkpoint directory layout: one model file per network plus model.json
/// carrying likelihood kind, dimensions, the global log-variance and any
/// caller-supplied metadata.
void save_checkpoint(const std::filesystem::path& dir, const IwaeModel& model,
                     const Json& extra = Json::object());
IwaeModel load_checkpoint(const std::filesystem::path& dir, Json* meta = nullptr);

} // namespace latgeo
