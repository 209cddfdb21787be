#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "pmuevent/decision.hpp"
#include "pmuevent/rng.hpp"

using namespace pmuevent;

TEST(Threshold, PaperValueAndStrictBoundary) {
    ThresholdRule rule{1.0, 1.0, 0.025};
    EXPECT_EQ(detect_threshold({0.02, 0.02}, rule), 1);  // 0.04 > 0.025
    EXPECT_EQ(detect_threshold({0.0, 0.0}, rule), 0);
    EXPECT_EQ(detect_threshold({0.0125, 0.0125}, rule), 0);  // exactly eta1 -> 0
}

TEST(Threshold, MonotoneInBothComponents) {
    Pcg32 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        ThresholdRule rule{rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 1)};
        if (rule.lambda_recon == 0.0 && rule.lambda_d == 0.0) rule.lambda_recon = 1.0;
        ErrorPair e{rng.uniform(0, 1), rng.uniform(0, 1)};
        ErrorPair bigger{e.e_recon + rng.uniform(0, 1), e.e_d + rng.uniform(0, 1)};
        EXPECT_GE(detect_threshold(bigger, rule), detect_threshold(e, rule));
    }
}

TEST(Threshold, ScaleInvariance) {
    Pcg32 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        ThresholdRule rule{rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0, 1)};
        const double c = rng.uniform(0.1, 10);
        ThresholdRule scaled{rule.lambda_recon * c, rule.lambda_d * c, rule.eta1 * c};
        ErrorPair e{rng.uniform(0, 1), rng.uniform(0, 1)};
        EXPECT_EQ(detect_threshold(e, rule), detect_threshold(e, scaled));
    }
}

TEST(Threshold, RuleValidation) {
    EXPECT_THROW(validate(ThresholdRule{0.0, 0.0, 0.1}), ConfigError);
    EXPECT_THROW(validate(ThresholdRule{-1.0, 1.0, 0.1}), ConfigError);
}

TEST(Hull, ThreeNonCollinearPointsAreTheHull) {
    ConvexHullRegion h = build_hull({{0, 0}, {1, 0}, {0, 1}});
    EXPECT_FALSE(h.degenerate);
    EXPECT_EQ(h.vertices.size(), 3u);
}

TEST(Hull, UnitSquareExcludesCentroid) {
    ConvexHullRegion h = build_hull({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
    EXPECT_EQ(h.vertices.size(), 4u);
    std::set<std::pair<double, double>> verts;
    for (const auto& v : h.vertices) verts.insert({v[0], v[1]});
    EXPECT_EQ(verts.count({0.5, 0.5}), 0u);
    EXPECT_EQ(verts.size(), 4u);
}

TEST(Hull, ContainsEveryInputPoint) {
    Pcg32 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ErrorPair> pts;
        for (int i = 0; i < 40; ++i) pts.push_back({rng.uniform(0, 1), rng.uniform(0, 1)});
        ConvexHullRegion h = build_hull(pts);
        for (const auto& p : pts) EXPECT_EQ(detect_hull(p, h), 0);
    }
}

TEST(Hull, CentroidAndVerticesAreInside) {
    ConvexHullRegion h = build_hull({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
    EXPECT_EQ(detect_hull({1, 1}, h), 0);
    for (const auto& v : h.vertices) EXPECT_EQ(detect_hull({v[0], v[1]}, h), 0);
    EXPECT_EQ(detect_hull({3, 1}, h), 1);
}

TEST(Hull, MatchesHalfPlaneOracleOnRandomPoints) {
    Pcg32 rng(11);
    for (int hull_trial = 0; hull_trial < 5; ++hull_trial) {
        std::vector<ErrorPair> cloud;
        for (int i = 0; i < 20; ++i)
            cloud.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        ConvexHullRegion h = build_hull(cloud);
        ASSERT_FALSE(h.degenerate);
        std::vector<oracles::Point2> poly;
        for (const auto& v : h.vertices) poly.push_back({v[0], v[1]});
        for (int i = 0; i < 2000; ++i) {
            ErrorPair p{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
            const bool inside = oracles::half_plane_inside({p.e_recon, p.e_d}, poly);
            EXPECT_EQ(detect_hull(p, h), inside ? 0 : 1);
        }
    }
}

TEST(Hull, ConstructionMatchesGiftWrappingOracle) {
    Pcg32 rng(13);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(62));
        std::vector<ErrorPair> cloud;
        std::vector<oracles::Point2> raw;
        for (int i = 0; i < n; ++i) {
            const double x = rng.uniform(0, 4), y = rng.uniform(0, 4);
            cloud.push_back({x, y});
            raw.push_back({x, y});
        }
        ConvexHullRegion h = build_hull(cloud);
        auto expected = oracles::jarvis_hull(raw);
        std::set<std::pair<double, double>> a, b;
        for (const auto& v : h.vertices) a.insert({v[0], v[1]});
        for (const auto& v : expected) b.insert({v[0], v[1]});
        EXPECT_EQ(a, b) << "trial " << trial;
    }
}

TEST(Hull, DegenerateCases) {
    // All points identical.
    ConvexHullRegion point_hull = build_hull({{1, 1}, {1, 1}, {1, 1}});
    EXPECT_TRUE(point_hull.degenerate);
    EXPECT_EQ(detect_hull({1, 1}, point_hull), 0);
    EXPECT_EQ(detect_hull({1, 1.1}, point_hull), 1);
    // Collinear points: members of the segment are inside, others out.
    ConvexHullRegion line_hull = build_hull({{0, 0}, {1, 1}, {2, 2}, {0.5, 0.5}});
    EXPECT_TRUE(line_hull.degenerate);
    EXPECT_EQ(detect_hull({1.5, 1.5}, line_hull), 0);
    EXPECT_EQ(detect_hull({1.5, 1.6}, line_hull), 1);
    EXPECT_EQ(detect_hull({3, 3}, line_hull), 1);
}

TEST(Hull, InflationGrowsTheRegion) {
    std::vector<ErrorPair> cloud{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    ConvexHullRegion exact = build_hull(cloud, 1.0);
    ConvexHullRegion inflated = build_hull(cloud, 1.2);
    const ErrorPair just_outside{1.05, 0.5};
    EXPECT_EQ(detect_hull(just_outside, exact), 1);
    EXPECT_EQ(detect_hull(just_outside, inflated), 0);
}

TEST(Hull, SaveLoadRoundTrip) {
    Pcg32 rng(17);
    std::vector<ErrorPair> cloud;
    for (int i = 0; i < 25; ++i) cloud.push_back({rng.uniform(0, 1), rng.uniform(0, 2)});
    ConvexHullRegion h = build_hull(cloud, 1.05);
    const auto path = std::filesystem::temp_directory_path() / "pmuevent_hull.csv";
    save_hull_csv(h, path.string());
    ConvexHullRegion loaded = load_hull_csv(path.string());
    EXPECT_EQ(loaded.degenerate, h.degenerate);
    EXPECT_DOUBLE_EQ(loaded.inflation, h.inflation);
    ASSERT_EQ(loaded.vertices.size(), h.vertices.size());
    for (std::size_t i = 0; i < h.vertices.size(); ++i) {
        EXPECT_DOUBLE_EQ(loaded.vertices[i][0], h.vertices[i][0]);
        EXPECT_DOUBLE_EQ(loaded.vertices[i][1], h.vertices[i][1]);
    }
}

TEST(Tune, PerfectSeparationPicksSmallestGapPoint) {
    std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    std::vector<int> labels{0, 0, 1, 1};
    auto res = tune_scores(scores, labels, {0.0, 0.3, 0.5, 0.7, 1.0});
    EXPECT_DOUBLE_EQ(res.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(res.threshold, 0.3);  // smallest grid point inside the gap
}

TEST(Tune, InvertedLabelsReportLowAccuracy) {
    std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    std::vector<int> labels{1, 1, 0, 0};  // inverted
    auto res = tune_scores(scores, labels, {0.0, 0.5, 1.0});
    EXPECT_LE(res.accuracy, 0.5);
}

TEST(Tune, SingleClassValidationIsAnError) {
    EXPECT_THROW(tune_scores({0.1, 0.2}, {0, 0}, {0.5}), DataError);
    EXPECT_THROW(tune_scores({0.1, 0.2}, {1, 1}, {0.5}), DataError);
}

TEST(Tune, RiseThenFallAccuracyCurve) {
    // Normal scores near 0.01, events near 0.05: sweeping the threshold
    // produces accuracy that rises to a peak and then declines.
    Pcg32 rng(23);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
        scores.push_back(0.01 + 0.004 * rng.gaussian());
        labels.push_back(0);
        scores.push_back(0.05 + 0.012 * rng.gaussian());
        labels.push_back(1);
    }
    auto acc_at = [&](double eta) {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if ((scores[i] > eta ? 1 : 0) == labels[i]) ++ok;
        return static_cast<double>(ok) / static_cast<double>(scores.size());
    };
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(0.002 * i);
    auto res = tune_scores(scores, labels, grid);
    EXPECT_GT(res.accuracy, acc_at(grid.front()) + 0.2);
    EXPECT_GT(res.accuracy, acc_at(grid.back()) + 0.2);
    EXPECT_GT(res.accuracy, 0.9);
}

TEST(Tune, WeightedPairInterface) {
    std::vector<ErrorPair> errs{{0.1, 0.0}, {0.0, 0.1}, {0.5, 0.4}, {0.4, 0.5}};
    std::vector<int> labels{0, 0, 1, 1};
    auto res = tune_threshold(errs, labels, ThresholdRule{1.0, 1.0, 0.0}, {0.05, 0.2, 0.5});
    EXPECT_DOUBLE_EQ(res.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(res.threshold, 0.2);
}
