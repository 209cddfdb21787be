#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmuevent/adam.hpp"
#include "pmuevent/checkpoint.hpp"
#include "pmuevent/dense.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/matrix.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

// Numerical guards: the log-sigma head is clamped before exponentiation and
// discriminator probabilities are clamped away from {0,1} before logs.
inline constexpr double kLogSigmaMin = -6.0;
inline constexpr double kLogSigmaMax = 4.0;
inline constexpr double kProbEps = 1e-7;

struct LossWeights {
    double lambda1 = 0.1;   // KL weight
    double lambda2 = 0.05;  // adversarial weight
};

// The 2-D error feature extracted per window: reconstruction error and
// discriminator rejection of the reconstruction. This pair is the input of
// every downstream decision rule.
struct ErrorPair {
    double e_recon = 0.0;
    double e_d = 0.0;
};

struct VaeGanLayout {
    std::size_t input_dim = 900;  // 150 samples x 6 channels by default
    std::size_t latent_dim = 16;
    std::vector<std::size_t> encoder_hidden = {256, 64};
    std::vector<std::size_t> decoder_hidden = {64, 256};
    std::vector<std::size_t> discriminator_hidden = {256, 64};
};

// Encoder trunk with two linear heads (mean and log-sigma), decoder/generator
// back to input space, and a sigmoid discriminator.
struct VaeGanModel {
    DenseStack encoder_trunk;
    DenseLayer mu_head;
    DenseLayer logsigma_head;
    DenseStack decoder;
    DenseStack discriminator;
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    LossWeights weights;
    std::uint64_t train_seed = 0;
};

inline VaeGanModel make_vaegan(const VaeGanLayout& layout, Pcg32& rng) {
    if (layout.encoder_hidden.empty() || layout.decoder_hidden.empty() ||
        layout.discriminator_hidden.empty())
        throw ConfigError("vaegan: all stacks need at least one hidden layer");
    VaeGanModel model;
    model.input_dim = layout.input_dim;
    model.latent_dim = layout.latent_dim;
    model.encoder_trunk = make_dense_stack(layout.input_dim, layout.encoder_hidden, Activation::Relu,
                                           Activation::Relu, rng);
    const std::size_t trunk_out = layout.encoder_hidden.back();
    model.mu_head = make_dense_layer(trunk_out, layout.latent_dim, Activation::Linear, rng);
    model.logsigma_head = make_dense_layer(trunk_out, layout.latent_dim, Activation::Linear, rng);
    auto dec_widths = layout.decoder_hidden;
    dec_widths.push_back(layout.input_dim);
    model.decoder = make_dense_stack(layout.latent_dim, dec_widths, Activation::Relu,
                                     Activation::Linear, rng);
    auto disc_widths = layout.discriminator_hidden;
    disc_widths.push_back(1);
    model.discriminator = make_dense_stack(layout.input_dim, disc_widths, Activation::Relu,
                                           Activation::Sigmoid, rng);
    return model;
}

// --- loss terms ------------------------------------------------------------

// Hybrid reconstruction loss: batch mean of per-window elementwise MSE plus
// the maximum over the batch of each window's largest absolute elementwise
// error. The max term keeps short, localized deviations from being averaged
// away; both terms are elementwise so they share scale.
inline double reconstruction_loss(const RealMatrix& m, const RealMatrix& mhat) {
    if (m.rows == 0) throw DataError("reconstruction_loss: empty batch");
    if (m.rows != mhat.rows || m.cols != mhat.cols)
        throw DimensionError("reconstruction_loss: shape mismatch");
    double mse = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double d = m.data[i] - mhat.data[i];
        mse += d * d;
        worst = std::max(worst, std::fabs(d));
    }
    return mse / static_cast<double>(m.size()) + worst;
}

// KL divergence of N(mu, sigma^2) from N(0, 1), summed over latent
// dimensions: -1/2 sum(1 + log sigma^2 - mu^2 - sigma^2).
inline double kl_loss(const std::vector<double>& mu, const std::vector<double>& sigma) {
    if (mu.size() != sigma.size()) throw DimensionError("kl_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (!(sigma[i] > 0.0)) throw std::domain_error("kl_loss: sigma must be positive");
        s += 1.0 + 2.0 * std::log(sigma[i]) - mu[i] * mu[i] - sigma[i] * sigma[i];
    }
    return -0.5 * s;
}

inline double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

// -log D(G(z)) for one reconstruction's discriminator output.
inline double adversarial_loss(double d_of_reconstruction) {
    return -std::log(clamp_prob(d_of_reconstruction));
}

inline double adversarial_loss(const std::vector<double>& d_of_reconstructions) {
    if (d_of_reconstructions.empty()) throw DataError("adversarial_loss: empty batch");
    double s = 0.0;
    for (double p : d_of_reconstructions) s += adversarial_loss(p);
    return s / static_cast<double>(d_of_reconstructions.size());
}

// -log D(M) - log(1 - D(G(z))).
inline double discriminator_loss(double d_real, double d_fake) {
    return -std::log(clamp_prob(d_real)) - std::log(1.0 - clamp_prob(d_fake));
}

inline double discriminator_loss(const std::vector<double>& d_real, const std::vector<double>& d_fake) {
    if (d_real.empty() || d_real.size() != d_fake.size())
        throw DimensionError("discriminator_loss: batch size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < d_real.size(); ++i) s += discriminator_loss(d_real[i], d_fake[i]);
    return s / static_cast<double>(d_real.size());
}

inline double total_generator_loss(double recon, double kl, double adv, const LossWeights& w) {
    return recon + w.lambda1 * kl + w.lambda2 * adv;
}

// --- encoding and sampling ---------------------------------------------------

// z = mu + sigma .* noise (the reparameterization trick, elementwise).
inline std::vector<double> sample_latent(const std::vector<double>& mu, const std::vector<double>& sigma,
                                         const std::vector<double>& noise) {
    if (mu.size() != sigma.size() || mu.size() != noise.size())
        throw DimensionError("sample_latent: length mismatch");
    std::vector<double> z(mu.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = mu[i] + sigma[i] * noise[i];
    return z;
}

struct EncodeResult {
    std::vector<double> mu;
    std::vector<double> sigma;
};

inline EncodeResult encode(const VaeGanModel& model, const std::vector<double>& window_flat) {
    if (window_flat.size() != model.input_dim)
        throw DimensionError("encode: input length " + std::to_string(window_flat.size()) +
                             " != input_dim " + std::to_string(model.input_dim));
    RealMatrix x(1, model.input_dim);
    x.data = window_flat;
    const RealMatrix trunk_out = forward(model.encoder_trunk, x).back();
    EncodeResult res;
    res.mu = forward({model.mu_head}, trunk_out).back().data;
    std::vector<double> ls = forward({model.logsigma_head}, trunk_out).back().data;
    res.sigma.resize(ls.size());
    for (std::size_t i = 0; i < ls.size(); ++i)
        res.sigma[i] = std::exp(std::clamp(ls[i], kLogSigmaMin, kLogSigmaMax));
    for (double v : res.mu)
        if (!std::isfinite(v)) throw TrainingError("encode: non-finite mean output");
    return res;
}

// --- training passes ---------------------------------------------------------

namespace detail {

struct GeneratorForward {
    std::vector<RealMatrix> trunk_acts;
    RealMatrix mu;        // B x L
    RealMatrix ls_raw;    // pre-clamp log sigma
    RealMatrix sigma;     // exp(clamped log sigma)
    RealMatrix z;         // B x L
    std::vector<RealMatrix> decoder_acts;
    const RealMatrix* recon = nullptr;  // decoder output, points into decoder_acts
};

inline GeneratorForward generator_forward(const VaeGanModel& model, const RealMatrix& x,
                                          const RealMatrix& noise) {
    GeneratorForward f;
    f.trunk_acts = forward(model.encoder_trunk, x);
    const RealMatrix& trunk_out = f.trunk_acts.back();
    f.mu = forward({model.mu_head}, trunk_out).back();
    f.ls_raw = forward({model.logsigma_head}, trunk_out).back();
    f.sigma = RealMatrix(f.ls_raw.rows, f.ls_raw.cols);
    for (std::size_t i = 0; i < f.ls_raw.size(); ++i)
        f.sigma.data[i] = std::exp(std::clamp(f.ls_raw.data[i], kLogSigmaMin, kLogSigmaMax));
    require_shape(noise, f.mu.rows, f.mu.cols, "generator noise");
    f.z = RealMatrix(f.mu.rows, f.mu.cols);
    for (std::size_t i = 0; i < f.z.size(); ++i)
        f.z.data[i] = f.mu.data[i] + f.sigma.data[i] * noise.data[i];
    f.decoder_acts = forward(model.decoder, f.z);
    f.recon = &f.decoder_acts.back();
    return f;
}

}  // namespace detail

struct GeneratorLossParts {
    double recon = 0.0;
    double kl = 0.0;
    double adv = 0.0;
    double total = 0.0;
};

// Loss of Eq. 5 on one batch with fixed reparameterization noise, plus
// analytic gradients for the encoder trunk, both heads, and the decoder
// (flat, in that order). The discriminator is treated as frozen: its input
// gradient flows back into the decoder but its parameter gradients are
// dropped. Used by both the training loop and the finite-difference checks.
inline GeneratorLossParts generator_loss_and_grads(const VaeGanModel& model, const RealMatrix& x,
                                                   const RealMatrix& noise, std::vector<double>* grads) {
    const std::size_t batch = x.rows;
    if (batch == 0) throw DataError("generator pass: empty batch");
    require_shape(x, batch, model.input_dim, "generator input");

    auto f = detail::generator_forward(model, x, noise);
    const RealMatrix& xh = *f.recon;
    auto disc_acts = forward(model.discriminator, xh);
    const RealMatrix& probs = disc_acts.back();

    GeneratorLossParts parts;
    parts.recon = reconstruction_loss(x, xh);
    for (std::size_t i = 0; i < f.mu.size(); ++i) {
        const double muv = f.mu.data[i], sg = f.sigma.data[i];
        parts.kl += 1.0 + 2.0 * std::log(sg) - muv * muv - sg * sg;
    }
    parts.kl *= -0.5 / static_cast<double>(batch);
    for (std::size_t i = 0; i < batch; ++i) parts.adv += -std::log(clamp_prob(probs.data[i]));
    parts.adv /= static_cast<double>(batch);
    parts.total = total_generator_loss(parts.recon, parts.kl, parts.adv, model.weights);
    if (!std::isfinite(parts.total)) throw TrainingError("generator pass: non-finite loss");
    if (!grads) return parts;

    // d(recon)/d(xh): MSE part everywhere, max part as a subgradient on the
    // first element attaining the batch maximum.
    RealMatrix dxh(xh.rows, xh.cols);
    const double inv_elems = 1.0 / static_cast<double>(x.size());
    std::size_t max_idx = 0;
    double max_val = -1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = xh.data[i] - x.data[i];
        dxh.data[i] = 2.0 * d * inv_elems;
        const double a = std::fabs(d);
        if (a > max_val) {
            max_val = a;
            max_idx = i;
        }
    }
    if (max_val > 0.0)
        dxh.data[max_idx] += (xh.data[max_idx] - x.data[max_idx]) > 0.0 ? 1.0 : -1.0;

    // Adversarial term through the frozen discriminator.
    RealMatrix dprob(batch, 1);
    for (std::size_t i = 0; i < batch; ++i) {
        const double p = probs.data[i];
        const bool clamped = (p < kProbEps) || (p > 1.0 - kProbEps);
        dprob.data[i] = clamped ? 0.0 : -model.weights.lambda2 / (static_cast<double>(batch) * p);
    }
    auto disc_back = backward(model.discriminator, disc_acts, dprob);
    for (std::size_t i = 0; i < dxh.size(); ++i) dxh.data[i] += disc_back.input_grad.data[i];

    auto dec_back = backward(model.decoder, f.decoder_acts, dxh);
    const RealMatrix& dz = dec_back.input_grad;

    // Through z = mu + sigma .* e and the KL term (computed on the clamped
    // log-sigma, so the clamp mask gates both paths).
    RealMatrix dmu = dz;
    RealMatrix dls(dz.rows, dz.cols);
    const double kl_scale = model.weights.lambda1 / static_cast<double>(batch);
    for (std::size_t i = 0; i < dz.size(); ++i) {
        const double sg = f.sigma.data[i];
        dmu.data[i] += kl_scale * f.mu.data[i];
        double g = dz.data[i] * noise.data[i] * sg + kl_scale * (sg * sg - 1.0);
        const double raw = f.ls_raw.data[i];
        if (raw < kLogSigmaMin || raw > kLogSigmaMax) g = 0.0;
        dls.data[i] = g;
    }

    const RealMatrix& trunk_out = f.trunk_acts.back();
    auto mu_back = backward({model.mu_head}, {trunk_out, f.mu}, dmu);
    auto ls_back = backward({model.logsigma_head}, {trunk_out, f.ls_raw}, dls);
    RealMatrix dtrunk = mu_back.input_grad;
    for (std::size_t i = 0; i < dtrunk.size(); ++i) dtrunk.data[i] += ls_back.input_grad.data[i];
    auto trunk_back = backward(model.encoder_trunk, f.trunk_acts, dtrunk);

    grads->clear();
    std::size_t total_params = parameter_count(model.encoder_trunk) + model.mu_head.weights.size() +
                               model.mu_head.bias.size() + model.logsigma_head.weights.size() +
                               model.logsigma_head.bias.size() + parameter_count(model.decoder);
    grads->reserve(total_params);
    for (const auto& g : trunk_back.layer_grads) {
        grads->insert(grads->end(), g.dweights.data.begin(), g.dweights.data.end());
        grads->insert(grads->end(), g.dbias.begin(), g.dbias.end());
    }
    for (const auto* back : {&mu_back, &ls_back}) {
        const auto& g = back->layer_grads[0];
        grads->insert(grads->end(), g.dweights.data.begin(), g.dweights.data.end());
        grads->insert(grads->end(), g.dbias.begin(), g.dbias.end());
    }
    for (const auto& g : dec_back.layer_grads) {
        grads->insert(grads->end(), g.dweights.data.begin(), g.dweights.data.end());
        grads->insert(grads->end(), g.dbias.begin(), g.dbias.end());
    }
    return parts;
}

// Loss of Eq. 9 on one batch (generator frozen) with analytic gradients for
// the discriminator parameters.
inline double discriminator_loss_and_grads(const VaeGanModel& model, const RealMatrix& x,
                                           const RealMatrix& noise, std::vector<double>* grads) {
    const std::size_t batch = x.rows;
    if (batch == 0) throw DataError("discriminator pass: empty batch");
    auto f = detail::generator_forward(model, x, noise);
    const RealMatrix& xh = *f.recon;

    auto acts_real = forward(model.discriminator, x);
    auto acts_fake = forward(model.discriminator, xh);
    const RealMatrix& pr = acts_real.back();
    const RealMatrix& pf = acts_fake.back();

    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i)
        loss += -std::log(clamp_prob(pr.data[i])) - std::log(1.0 - clamp_prob(pf.data[i]));
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss)) throw TrainingError("discriminator pass: non-finite loss");
    if (!grads) return loss;

    RealMatrix dpr(batch, 1), dpf(batch, 1);
    for (std::size_t i = 0; i < batch; ++i) {
        const double prv = pr.data[i], pfv = pf.data[i];
        dpr.data[i] = (prv < kProbEps || prv > 1.0 - kProbEps)
                          ? 0.0
                          : -1.0 / (static_cast<double>(batch) * prv);
        dpf.data[i] = (pfv < kProbEps || pfv > 1.0 - kProbEps)
                          ? 0.0
                          : 1.0 / (static_cast<double>(batch) * (1.0 - pfv));
    }
    auto back_real = backward(model.discriminator, acts_real, dpr);
    auto back_fake = backward(model.discriminator, acts_fake, dpf);
    grads->assign(parameter_count(model.discriminator), 0.0);
    accumulate_flat(*grads, back_real.layer_grads);
    accumulate_flat(*grads, back_fake.layer_grads);
    return loss;
}

inline std::vector<ParamView> generator_parameter_views(VaeGanModel& model) {
    std::vector<ParamView> views = parameter_views(model.encoder_trunk);
    views.push_back({model.mu_head.weights.data.data(), model.mu_head.weights.size()});
    views.push_back({model.mu_head.bias.data(), model.mu_head.bias.size()});
    views.push_back({model.logsigma_head.weights.data.data(), model.logsigma_head.weights.size()});
    views.push_back({model.logsigma_head.bias.data(), model.logsigma_head.bias.size()});
    auto dec = parameter_views(model.decoder);
    views.insert(views.end(), dec.begin(), dec.end());
    return views;
}

// --- inference ----------------------------------------------------------------

// Deterministic per-window error extraction: z = mu (no sampling noise),
// e_recon = per-window MSE + max absolute error, e_d = -log D(G(mu)).
inline ErrorPair infer_errors(const VaeGanModel& model, const std::vector<double>& window_flat) {
    if (window_flat.size() != model.input_dim)
        throw DimensionError("infer_errors: window length " + std::to_string(window_flat.size()) +
                             " != input_dim " + std::to_string(model.input_dim));
    RealMatrix x(1, model.input_dim);
    x.data = window_flat;
    RealMatrix zero_noise(1, model.latent_dim);
    auto f = detail::generator_forward(model, x, zero_noise);
    ErrorPair pair;
    pair.e_recon = reconstruction_loss(x, *f.recon);
    const double p = forward(model.discriminator, *f.recon).back().data[0];
    pair.e_d = -std::log(clamp_prob(p));
    return pair;
}

// --- training -------------------------------------------------------------------

struct TrainConfig {
    double learning_rate = 2e-4;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 100;
    std::size_t patience = 8;       // early-stopping patience, epochs
    double val_fraction = 0.15;
    std::uint64_t seed = 1;
    LossWeights weights;
};

struct EpochStats {
    double recon = 0.0;
    double kl = 0.0;
    double adv = 0.0;
    double disc = 0.0;
    double val_recon = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    std::size_t best_epoch = 0;  // 0-based index of the restored parameters
};

namespace detail {

inline RealMatrix gather_rows(const RealMatrix& src, const std::vector<std::size_t>& idx,
                              std::size_t begin, std::size_t count) {
    RealMatrix out(count, src.cols);
    for (std::size_t r = 0; r < count; ++r) {
        const double* from = src.row_ptr(idx[begin + r]);
        std::copy(from, from + src.cols, out.row_ptr(r));
    }
    return out;
}

inline RealMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Pcg32& rng) {
    RealMatrix m(rows, cols);
    for (double& v : m.data) v = rng.gaussian();
    return m;
}

// Mean per-window reconstruction error with z = mu; the early-stopping
// criterion, deterministic across epochs.
inline double validation_recon(const VaeGanModel& model, const RealMatrix& windows,
                               const std::vector<std::size_t>& idx, std::size_t begin,
                               std::size_t count) {
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        RealMatrix x(1, windows.cols);
        const double* from = windows.row_ptr(idx[begin + k]);
        std::copy(from, from + windows.cols, x.data.begin());
        RealMatrix zero_noise(1, model.latent_dim);
        auto f = generator_forward(model, x, zero_noise);
        total += reconstruction_loss(x, *f.recon);
    }
    return total / static_cast<double>(count);
}

struct ModelSnapshot {
    DenseStack trunk, decoder, discriminator;
    DenseLayer mu_head, logsigma_head;
};

inline ModelSnapshot snapshot(const VaeGanModel& m) {
    return {m.encoder_trunk, m.decoder, m.discriminator, m.mu_head, m.logsigma_head};
}

inline void restore(VaeGanModel& m, const ModelSnapshot& s) {
    m.encoder_trunk = s.trunk;
    m.decoder = s.decoder;
    m.discriminator = s.discriminator;
    m.mu_head = s.mu_head;
    m.logsigma_head = s.logsigma_head;
}

}  // namespace detail

// Unsupervised training on normal windows only. Per batch: one discriminator
// step on Eq. 9 with the generator frozen, then one encoder+decoder step on
// Eq. 5 with the discriminator frozen. Stops when validation reconstruction
// loss has not improved for `patience` epochs and restores the best epoch's
// parameters. Deterministic under a fixed seed.
inline TrainHistory train(VaeGanModel& model, const RealMatrix& windows, const TrainConfig& cfg) {
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (cfg.patience < 1) throw ConfigError("train: patience must be >= 1");
    if (windows.cols != model.input_dim)
        throw DimensionError("train: window width != model input_dim");
    if (!windows.all_finite()) throw DataError("train: non-finite training data");

    // Guard: inputs must be normalized windows (zero channel means).
    for (std::size_t r = 0; r < windows.rows; ++r) {
        const double* row = windows.row_ptr(r);
        for (std::size_t c = 0; c < 6 && c < windows.cols; ++c) {
            double mean = 0.0;
            std::size_t n = 0;
            for (std::size_t j = c; j < windows.cols; j += 6, ++n) mean += row[j];
            mean /= static_cast<double>(n);
            if (std::fabs(mean) > 1e-6)
                throw ContractError("train: window " + std::to_string(r) +
                                    " is not normalized (channel mean " + std::to_string(mean) + ")");
        }
    }

    const std::size_t n = windows.rows;
    std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(n)));
    if (cfg.val_fraction > 0.0 && n_val == 0) n_val = 1;
    if (n_val >= n) throw ConfigError("train: validation fraction leaves no training data");
    const std::size_t n_train = n - n_val;
    if (n_train < cfg.batch_size)
        throw ConfigError("train: need at least one full batch of training windows (" +
                          std::to_string(n_train) + " < " + std::to_string(cfg.batch_size) + ")");

    // Temporal split: the trailing windows form the validation set.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));

    model.weights = cfg.weights;
    model.train_seed = cfg.seed;
    Pcg32 rng(cfg.seed);
    auto gen_views = generator_parameter_views(model);
    auto disc_views = parameter_views(model.discriminator);
    std::size_t gen_total = 0, disc_total = 0;
    for (const auto& v : gen_views) gen_total += v.size;
    for (const auto& v : disc_views) disc_total += v.size;
    AdamState gen_state(gen_total);
    AdamState disc_state(disc_total);

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    detail::ModelSnapshot best = detail::snapshot(model);

    const std::size_t n_batches = n_train / cfg.batch_size;  // trailing partial batch is dropped
    std::vector<double> grads;
    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        EpochStats stats;
        for (std::size_t b = 0; b < n_batches; ++b) {
            RealMatrix batch = detail::gather_rows(windows, train_idx, b * cfg.batch_size, cfg.batch_size);
            try {
                RealMatrix noise_d = detail::gaussian_matrix(cfg.batch_size, model.latent_dim, rng);
                stats.disc += discriminator_loss_and_grads(model, batch, noise_d, &grads);
                adam_step(disc_views, grads, disc_state, cfg.learning_rate);

                RealMatrix noise_g = detail::gaussian_matrix(cfg.batch_size, model.latent_dim, rng);
                auto parts = generator_loss_and_grads(model, batch, noise_g, &grads);
                adam_step(gen_views, grads, gen_state, cfg.learning_rate);
                stats.recon += parts.recon;
                stats.kl += parts.kl;
                stats.adv += parts.adv;
            } catch (const TrainingError& e) {
                throw TrainingError(std::string(e.what()) + " (epoch " + std::to_string(epoch) + ")");
            }
        }
        const double inv_b = 1.0 / static_cast<double>(n_batches);
        stats.recon *= inv_b;
        stats.kl *= inv_b;
        stats.adv *= inv_b;
        stats.disc *= inv_b;
        stats.val_recon = n_val > 0 ? detail::validation_recon(model, windows, order, n_train, n_val)
                                    : stats.recon;
        history.epochs.push_back(stats);

        if (stats.val_recon < best_val) {
            best_val = stats.val_recon;
            best = detail::snapshot(model);
            history.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    detail::restore(model, best);
    return history;
}

// --- persistence ------------------------------------------------------------------

inline void save_vaegan(const VaeGanModel& model, const std::string& path) {
    Checkpoint ckpt;
    ckpt.meta["input_dim"] = static_cast<double>(model.input_dim);
    ckpt.meta["latent_dim"] = static_cast<double>(model.latent_dim);
    ckpt.meta["lambda1"] = model.weights.lambda1;
    ckpt.meta["lambda2"] = model.weights.lambda2;
    ckpt.meta["train_seed"] = static_cast<double>(model.train_seed);
    ckpt.sections.emplace_back("encoder_trunk", model.encoder_trunk);
    ckpt.sections.emplace_back("encoder_mu", DenseStack{model.mu_head});
    ckpt.sections.emplace_back("encoder_logsigma", DenseStack{model.logsigma_head});
    ckpt.sections.emplace_back("decoder", model.decoder);
    ckpt.sections.emplace_back("discriminator", model.discriminator);
    save_checkpoint(ckpt, path);
}

inline VaeGanModel load_vaegan(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    VaeGanModel model;
    model.input_dim = static_cast<std::size_t>(ckpt.meta_value("input_dim"));
    model.latent_dim = static_cast<std::size_t>(ckpt.meta_value("latent_dim"));
    model.weights.lambda1 = ckpt.meta_value("lambda1");
    model.weights.lambda2 = ckpt.meta_value("lambda2");
    model.train_seed = static_cast<std::uint64_t>(ckpt.meta_value("train_seed"));
    model.encoder_trunk = ckpt.section("encoder_trunk");
    model.mu_head = ckpt.section("encoder_mu").at(0);
    model.logsigma_head = ckpt.section("encoder_logsigma").at(0);
    model.decoder = ckpt.section("decoder");
    model.discriminator = ckpt.section("discriminator");
    if (model.mu_head.fan_out() != model.latent_dim ||
        model.logsigma_head.fan_out() != model.latent_dim)
        throw IoError("vaegan checkpoint: head width != latent_dim");
    if (model.decoder.back().fan_out() != model.input_dim)
        throw IoError("vaegan checkpoint: decoder output != input_dim");
    return model;
}

}  // namespace pmuevent
