#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pmuevent/adam.hpp"
#include "pmuevent/checkpoint.hpp"
#include "pmuevent/dense.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/vaegan.hpp"

namespace pmuevent {

inline constexpr int kNumKnownClasses = 5;  // labels 0..4; 5 is fusion's job

// Closed-set MLP over the 2-D error features. Inputs are standardized with
// statistics frozen at training time. Optionally the latent mean can be
// appended as extra features (experimental, off by default); the feature
// width is then 2 + latent_dim.
struct MlpClassifier {
    DenseStack net;  // feature_dim -> hidden -> 5 logits, linear output
    std::vector<double> feat_mean;
    std::vector<double> feat_std;
    bool use_latent = false;

    std::size_t feature_dim() const { return feat_mean.size(); }
};

struct ClassifierConfig {
    std::vector<std::size_t> hidden = {32, 32};
    double learning_rate = 3e-3;
    std::size_t batch_size = 64;
    std::size_t max_epochs = 300;
    std::uint64_t seed = 11;
    bool use_latent_features = false;
};

// Feature vector for one window: the error pair, plus the latent mean when
// the experimental switch is on.
inline std::vector<double> classifier_features(const ErrorPair& e) { return {e.e_recon, e.e_d}; }

inline std::vector<double> classifier_features(const VaeGanModel& model, const ErrorPair& e,
                                               const std::vector<double>& window_flat, bool use_latent) {
    std::vector<double> f{e.e_recon, e.e_d};
    if (use_latent) {
        auto enc = encode(model, window_flat);
        f.insert(f.end(), enc.mu.begin(), enc.mu.end());
    }
    return f;
}

namespace detail {

inline std::vector<double> standardized(const MlpClassifier& clf, const std::vector<double>& features) {
    if (features.size() != clf.feature_dim())
        throw DimensionError("classifier: feature width " + std::to_string(features.size()) +
                             " != trained width " + std::to_string(clf.feature_dim()));
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        out[i] = (features[i] - clf.feat_mean[i]) / clf.feat_std[i];
    return out;
}

inline int argmax_lowest(const double* values, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (values[i] > values[best]) best = i;  // strict: ties keep the lowest index
    return static_cast<int>(best);
}

}  // namespace detail

// Softmax cross-entropy with inverse-frequency class weights, trained with
// Adam. Labels must be 0..4; a type-5 sample in the training set is a
// contract violation, unknowns are never trained on.
inline MlpClassifier train_classifier(const std::vector<std::vector<double>>& features,
                                      const std::vector<int>& labels, const ClassifierConfig& cfg) {
    if (features.empty() || features.size() != labels.size())
        throw DataError("train_classifier: features/labels size mismatch or empty");
    const std::size_t dim = features[0].size();
    for (const auto& f : features)
        if (f.size() != dim) throw DimensionError("train_classifier: ragged feature rows");
    std::vector<std::size_t> class_count(kNumKnownClasses, 0);
    for (int l : labels) {
        if (l == 5) throw ContractError("train_classifier: label 5 (unknown) in training data");
        if (l < 0 || l >= kNumKnownClasses)
            throw ContractError("train_classifier: label " + std::to_string(l) + " outside 0..4");
        ++class_count[static_cast<std::size_t>(l)];
    }

    MlpClassifier clf;
    clf.use_latent = cfg.use_latent_features;
    clf.feat_mean.assign(dim, 0.0);
    clf.feat_std.assign(dim, 1.0);
    for (const auto& f : features)
        for (std::size_t j = 0; j < dim; ++j) clf.feat_mean[j] += f[j];
    for (double& m : clf.feat_mean) m /= static_cast<double>(features.size());
    for (std::size_t j = 0; j < dim; ++j) {
        double var = 0.0;
        for (const auto& f : features) {
            const double d = f[j] - clf.feat_mean[j];
            var += d * d;
        }
        clf.feat_std[j] = std::sqrt(var / static_cast<double>(features.size()));
        if (clf.feat_std[j] < 1e-12) clf.feat_std[j] = 1.0;
    }

    RealMatrix x(features.size(), dim);
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = 0; j < dim; ++j)
            x(i, j) = (features[i][j] - clf.feat_mean[j]) / clf.feat_std[j];

    // Inverse-frequency weights, normalized to mean one over the samples.
    std::size_t present = 0;
    for (std::size_t c = 0; c < class_count.size(); ++c) present += class_count[c] > 0 ? 1 : 0;
    std::vector<double> class_weight(kNumKnownClasses, 0.0);
    for (std::size_t c = 0; c < class_count.size(); ++c)
        if (class_count[c] > 0)
            class_weight[c] = static_cast<double>(labels.size()) /
                              (static_cast<double>(present) * static_cast<double>(class_count[c]));

    Pcg32 rng(cfg.seed);
    auto widths = cfg.hidden;
    widths.push_back(kNumKnownClasses);
    clf.net = make_dense_stack(dim, widths, Activation::Relu, Activation::Linear, rng);

    auto views = parameter_views(clf.net);
    AdamState state(parameter_count(clf.net));
    std::vector<std::size_t> idx(features.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const std::size_t batch = std::min(cfg.batch_size, features.size());

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(idx);
        for (std::size_t start = 0; start + batch <= idx.size(); start += batch) {
            RealMatrix bx(batch, dim);
            std::vector<int> by(batch);
            double weight_sum = 0.0;
            for (std::size_t r = 0; r < batch; ++r) {
                const std::size_t i = idx[start + r];
                std::copy(x.row_ptr(i), x.row_ptr(i) + dim, bx.row_ptr(r));
                by[r] = labels[i];
                weight_sum += class_weight[static_cast<std::size_t>(by[r])];
            }
            auto acts = forward(clf.net, bx);
            const RealMatrix& logits = acts.back();
            RealMatrix dlogits(batch, kNumKnownClasses);
            for (std::size_t r = 0; r < batch; ++r) {
                const double* row = logits.row_ptr(r);
                double mx = row[0];
                for (int c = 1; c < kNumKnownClasses; ++c) mx = std::max(mx, row[c]);
                double denom = 0.0;
                for (int c = 0; c < kNumKnownClasses; ++c) denom += std::exp(row[c] - mx);
                const double w = class_weight[static_cast<std::size_t>(by[r])] / weight_sum;
                for (int c = 0; c < kNumKnownClasses; ++c) {
                    const double p = std::exp(row[c] - mx) / denom;
                    dlogits(r, static_cast<std::size_t>(c)) =
                        w * (p - (c == by[r] ? 1.0 : 0.0));
                }
            }
            auto back = backward(clf.net, acts, dlogits);
            adam_step(views, flatten_grads(back.layer_grads), state, cfg.learning_rate);
        }
    }
    return clf;
}

inline MlpClassifier train_classifier(const std::vector<ErrorPair>& errors, const std::vector<int>& labels,
                                      const ClassifierConfig& cfg) {
    std::vector<std::vector<double>> feats(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) feats[i] = classifier_features(errors[i]);
    return train_classifier(feats, labels, cfg);
}

// Argmax of the logits; exact ties resolve to the lowest label index.
inline int classify(const MlpClassifier& clf, const std::vector<double>& features) {
    auto z = detail::standardized(clf, features);
    const std::vector<double> logits = forward_vector(clf.net, z);
    return detail::argmax_lowest(logits.data(), logits.size());
}

inline int classify(const MlpClassifier& clf, const ErrorPair& e) {
    return classify(clf, classifier_features(e));
}

inline void save_classifier(const MlpClassifier& clf, const std::string& path) {
    Checkpoint ckpt;
    ckpt.meta["class_count"] = kNumKnownClasses;
    ckpt.meta["feature_dim"] = static_cast<double>(clf.feature_dim());
    ckpt.meta["use_latent"] = clf.use_latent ? 1.0 : 0.0;
    for (std::size_t j = 0; j < clf.feature_dim(); ++j) {
        ckpt.meta["feat_mean" + std::to_string(j)] = clf.feat_mean[j];
        ckpt.meta["feat_std" + std::to_string(j)] = clf.feat_std[j];
    }
    ckpt.sections.emplace_back("classifier", clf.net);
    save_checkpoint(ckpt, path);
}

inline MlpClassifier load_classifier(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    if (static_cast<int>(ckpt.meta_value("class_count")) != kNumKnownClasses)
        throw IoError("classifier checkpoint: unexpected class count");
    MlpClassifier clf;
    clf.use_latent = ckpt.meta_value("use_latent") != 0.0;
    const auto dim = static_cast<std::size_t>(ckpt.meta_value("feature_dim"));
    clf.feat_mean.resize(dim);
    clf.feat_std.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        clf.feat_mean[j] = ckpt.meta_value("feat_mean" + std::to_string(j));
        clf.feat_std[j] = ckpt.meta_value("feat_std" + std::to_string(j));
    }
    clf.net = ckpt.section("classifier");
    if (clf.net.back().fan_out() != kNumKnownClasses)
        throw IoError("classifier checkpoint: output width != 5");
    return clf;
}

}  // namespace pmuevent
