#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pmuevent/fusion.hpp"
#include "pmuevent/rng.hpp"

using namespace pmuevent;

TEST(IdentifyRow, AllZerosStaysZero) {
    for (int eta : {1, 2, 3}) EXPECT_EQ(identify_row({0, 0, 0, 0}, eta), 0);
}

TEST(IdentifyRow, FlowchartHandTraces) {
    EXPECT_EQ(identify_row({1, 1, 1, 0, 2}, 2), 1);  // run of three 1s exceeds 2
    EXPECT_EQ(identify_row({1, 2, 1, 2, 1}, 1), 0);  // all nonzero runs have length 1
}

TEST(IdentifyRow, StrictThresholdAndEarliestTieBreak) {
    EXPECT_EQ(identify_row({2, 2, 2}, 3), 0);      // run == eta is not enough
    EXPECT_EQ(identify_row({2, 2, 2}, 2), 2);
    EXPECT_EQ(identify_row({3, 3, 0, 1, 1}, 1), 3);  // equal maximal runs: earliest wins
}

TEST(IdentifyRow, MatchesEnumerationOracle) {
    Pcg32 rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t len = 1 + rng.below(12);
        std::vector<int> row(len);
        for (auto& v : row) v = static_cast<int>(rng.below(5));
        const int eta = 1 + static_cast<int>(rng.below(3));
        EXPECT_EQ(identify_row(row, eta), oracles::enumerate_runs_identify(row, eta))
            << "trial " << trial;
    }
}

TEST(IdentifyRow, AppendingZerosNeverChangesAConfirmedLabel) {
    Pcg32 rng(102);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> row(3 + rng.below(8));
        for (auto& v : row) v = static_cast<int>(rng.below(5));
        const int eta = 1 + static_cast<int>(rng.below(3));
        const int before = identify_row(row, eta);
        if (before == 0) continue;
        std::vector<int> padded = row;
        padded.insert(padded.end(), 4, 0);
        EXPECT_EQ(identify_row(padded, eta), before);
    }
}

TEST(IdentifyRow, Errors) {
    EXPECT_THROW(identify_row({}, 1), DataError);
    EXPECT_THROW(identify_row({1}, 0), ConfigError);
}

TEST(AggregateRows, FrequencyAndTies) {
    EXPECT_EQ(aggregate_rows({0, 0, 0}), 0);
    EXPECT_EQ(aggregate_rows({2, 2, 3, 0}), 2);
    EXPECT_EQ(aggregate_rows({1, 2}), 1);  // tie -> lowest label
    EXPECT_EQ(aggregate_rows({5, 5, 4}), 5);
    EXPECT_THROW(aggregate_rows({}), DataError);
    EXPECT_THROW(aggregate_rows({7}), ContractError);
}

TEST(Fuse, TableOneExhaustive) {
    // All 10 (detection, classification) pairs.
    EXPECT_EQ(fuse(0, 0), 0);
    EXPECT_EQ(fuse(1, 0), 5);
    for (int c = 1; c <= 4; ++c) {
        EXPECT_EQ(fuse(0, c), c);
        EXPECT_EQ(fuse(1, c), c);
    }
}

TEST(Fuse, LabelFiveOnlyFromDetectedUnclassified) {
    for (int d = 0; d <= 1; ++d)
        for (int c = 0; c <= 4; ++c) {
            const int result = fuse(d, c);
            EXPECT_EQ(result == 5, d == 1 && c == 0);
        }
}

TEST(Fuse, DomainErrors) {
    EXPECT_THROW(fuse(2, 0), ContractError);
    EXPECT_THROW(fuse(-1, 0), ContractError);
    EXPECT_THROW(fuse(0, 5), ContractError);
    EXPECT_THROW(fuse(0, -1), ContractError);
}

namespace {

DetectionMatrix make_det(std::vector<std::vector<int>> rows) {
    DetectionMatrix m;
    m.flags = std::move(rows);
    for (std::size_t p = 0; p < m.flags.size(); ++p) m.pmu_ids.push_back(static_cast<int>(p));
    m.column_starts.resize(m.flags[0].size());
    for (std::size_t k = 0; k < m.column_starts.size(); ++k)
        m.column_starts[k] = static_cast<double>(k);
    return m;
}

ClassificationMatrix make_cls(std::vector<std::vector<int>> rows) {
    ClassificationMatrix m;
    m.labels = std::move(rows);
    for (std::size_t p = 0; p < m.labels.size(); ++p) m.pmu_ids.push_back(static_cast<int>(p));
    m.column_starts.resize(m.labels[0].size());
    for (std::size_t k = 0; k < m.column_starts.size(); ++k)
        m.column_starts[k] = static_cast<double>(k);
    return m;
}

}  // namespace

TEST(FuseSpan, KnownEventAcrossPmus) {
    auto det = make_det({{0, 1, 1, 1, 0}, {0, 1, 1, 1, 1}, {0, 0, 0, 0, 0}});
    auto cls = make_cls({{0, 3, 3, 3, 0}, {0, 3, 3, 3, 3}, {0, 0, 0, 0, 0}});
    FinalDecision d = fuse_span(det, cls, 0, 5, {2});
    EXPECT_EQ(d.detection_system, 1);
    EXPECT_EQ(d.classification_system, 3);
    EXPECT_EQ(d.final_label, 3);
    EXPECT_EQ(d.detection_rows, (std::vector<int>{1, 1, 0}));
    EXPECT_EQ(d.classification_rows, (std::vector<int>{3, 3, 0}));
}

TEST(FuseSpan, UnknownEventPattern) {
    // Detection fires consistently; classification flickers with no run > eta.
    auto det = make_det({{1, 1, 1, 1, 1}, {1, 1, 1, 1, 0}});
    auto cls = make_cls({{1, 2, 1, 3, 2}, {2, 1, 3, 1, 2}});
    FinalDecision d = fuse_span(det, cls, 0, 5, {2});
    EXPECT_EQ(d.detection_system, 1);
    EXPECT_EQ(d.classification_system, 0);
    EXPECT_EQ(d.final_label, 5);
}

TEST(FuseSpan, ColumnRangeRestricts) {
    auto det = make_det({{1, 1, 1, 0, 0, 0}});
    auto cls = make_cls({{2, 2, 2, 0, 0, 0}});
    FinalDecision left = fuse_span(det, cls, 0, 3, {2});
    FinalDecision right = fuse_span(det, cls, 3, 6, {2});
    EXPECT_EQ(left.final_label, 2);
    EXPECT_EQ(right.final_label, 0);
    EXPECT_THROW(fuse_span(det, cls, 3, 3, {2}), DimensionError);
    EXPECT_THROW(fuse_span(det, cls, 0, 9, {2}), DimensionError);
}
