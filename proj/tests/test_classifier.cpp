#include <gtest/gtest.h>

#include <filesystem>

#include "pmuevent/classifier.hpp"
#include "pmuevent/rng.hpp"

using namespace pmuevent;

namespace {

// Two linearly separable blobs in error space.
void separable_toy(std::vector<ErrorPair>& errs, std::vector<int>& labels) {
    Pcg32 rng(71);
    for (int i = 0; i < 60; ++i) {
        errs.push_back({0.02 + 0.005 * rng.gaussian(), 0.7 + 0.02 * rng.gaussian()});
        labels.push_back(0);
        errs.push_back({0.30 + 0.02 * rng.gaussian(), 1.5 + 0.05 * rng.gaussian()});
        labels.push_back(1);
    }
}

}  // namespace

TEST(Classifier, LearnsSeparableToyProblem) {
    std::vector<ErrorPair> errs;
    std::vector<int> labels;
    separable_toy(errs, labels);
    ClassifierConfig cfg;
    cfg.max_epochs = 200;
    cfg.seed = 5;
    MlpClassifier clf = train_classifier(errs, labels, cfg);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < errs.size(); ++i)
        if (classify(clf, errs[i]) == labels[i]) ++correct;
    EXPECT_EQ(correct, errs.size());
}

TEST(Classifier, SameSeedSameParameters) {
    std::vector<ErrorPair> errs;
    std::vector<int> labels;
    separable_toy(errs, labels);
    ClassifierConfig cfg;
    cfg.max_epochs = 30;
    cfg.seed = 6;
    MlpClassifier a = train_classifier(errs, labels, cfg);
    MlpClassifier b = train_classifier(errs, labels, cfg);
    ASSERT_EQ(a.net.size(), b.net.size());
    for (std::size_t l = 0; l < a.net.size(); ++l) {
        EXPECT_EQ(a.net[l].weights.data, b.net[l].weights.data);
        EXPECT_EQ(a.net[l].bias, b.net[l].bias);
    }
}

TEST(Classifier, SingleClassPredictsThatClassEverywhere) {
    std::vector<ErrorPair> errs;
    std::vector<int> labels;
    Pcg32 rng(72);
    for (int i = 0; i < 30; ++i) {
        errs.push_back({rng.uniform(0, 1), rng.uniform(0, 2)});
        labels.push_back(3);
    }
    ClassifierConfig cfg;
    cfg.max_epochs = 60;
    MlpClassifier clf = train_classifier(errs, labels, cfg);
    for (int i = 0; i < 20; ++i)
        EXPECT_EQ(classify(clf, ErrorPair{rng.uniform(0, 1), rng.uniform(0, 2)}), 3);
}

TEST(Classifier, LabelFiveInTrainingIsContractViolation) {
    std::vector<ErrorPair> errs{{0.1, 0.1}, {0.2, 0.2}};
    std::vector<int> labels{0, 5};
    EXPECT_THROW(train_classifier(errs, labels, ClassifierConfig{}), ContractError);
    labels = {0, 6};
    EXPECT_THROW(train_classifier(errs, labels, ClassifierConfig{}), ContractError);
}

TEST(Classifier, ArgmaxTieBreaksTowardLowestIndex) {
    const double logits_a[5] = {5, 0, 0, 0, 0};
    EXPECT_EQ(detail::argmax_lowest(logits_a, 5), 0);
    const double logits_b[5] = {0, 3, 3, 0, 0};
    EXPECT_EQ(detail::argmax_lowest(logits_b, 5), 1);
    const double logits_c[5] = {2, 2, 2, 2, 2};
    EXPECT_EQ(detail::argmax_lowest(logits_c, 5), 0);
}

TEST(Classifier, OutputAlwaysInKnownRangeAndShiftInvariant) {
    std::vector<ErrorPair> errs;
    std::vector<int> labels;
    separable_toy(errs, labels);
    ClassifierConfig cfg;
    cfg.max_epochs = 40;
    MlpClassifier clf = train_classifier(errs, labels, cfg);
    Pcg32 rng(73);
    MlpClassifier shifted = clf;
    for (double& b : shifted.net.back().bias) b += 7.25;  // constant logit shift
    for (int i = 0; i < 200; ++i) {
        ErrorPair e{rng.uniform(-0.5, 2), rng.uniform(-1, 3)};
        const int label = classify(clf, e);
        EXPECT_GE(label, 0);
        EXPECT_LE(label, 4);
        EXPECT_EQ(classify(shifted, e), label);
    }
}

TEST(Classifier, SaveLoadPreservesDecisions) {
    std::vector<ErrorPair> errs;
    std::vector<int> labels;
    separable_toy(errs, labels);
    ClassifierConfig cfg;
    cfg.max_epochs = 40;
    MlpClassifier clf = train_classifier(errs, labels, cfg);
    const auto path = std::filesystem::temp_directory_path() / "pmuevent_clf.ckpt";
    save_classifier(clf, path.string());
    MlpClassifier loaded = load_classifier(path.string());
    Pcg32 rng(74);
    for (int i = 0; i < 100; ++i) {
        ErrorPair e{rng.uniform(0, 0.5), rng.uniform(0, 2)};
        EXPECT_EQ(classify(loaded, e), classify(clf, e));
    }
}

TEST(Classifier, FeatureWidthMismatchThrows) {
    std::vector<ErrorPair> errs{{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}, {0.4, 0.4}};
    std::vector<int> labels{0, 0, 1, 1};
    ClassifierConfig cfg;
    cfg.max_epochs = 5;
    MlpClassifier clf = train_classifier(errs, labels, cfg);
    EXPECT_THROW(classify(clf, std::vector<double>{0.1, 0.2, 0.3}), DimensionError);
}
