#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "pmuevent/sliding.hpp"
#include "pmuevent/synthetic.hpp"

using namespace pmuevent;

namespace {

PmuStream steady_stream(int pmu, double seconds, double rate = 30.0) {
    PmuStream s;
    s.pmu_id = pmu;
    const auto n = static_cast<std::size_t>(seconds * rate);
    for (std::size_t k = 0; k < n; ++k) {
        PmuFrame fr;
        fr.timestamp = static_cast<double>(k) / rate;
        fr.pmu_id = pmu;
        fr.v_a = fr.v_b = fr.v_c = 7200.0 + static_cast<double>(k % 7);
        fr.i = 100.0;
        fr.f = 60.0;
        fr.df = 0.0;
        s.frames.push_back(fr);
    }
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST(SegmentStream, SixtySecondsGivesFiftySixSegments) {
    auto grid = segment_stream({steady_stream(0, 60.0)}, {5.0, 1.0, 30.0}, 7200.0);
    EXPECT_EQ(grid.n_columns(), 56u);  // (60 - 5)/1 + 1
    EXPECT_EQ(grid.n_pmus(), 1u);
    for (std::size_t k = 0; k < grid.n_columns(); ++k)
        EXPECT_NEAR(grid.column_starts[k], static_cast<double>(k), 1e-9);
}

TEST(SegmentStream, ExactWindowGivesOneSegment) {
    auto grid = segment_stream({steady_stream(0, 5.0)}, {5.0, 1.0, 30.0}, 7200.0);
    EXPECT_EQ(grid.n_columns(), 1u);
    EXPECT_TRUE(grid.valid[0][0]);
    EXPECT_EQ(grid.windows[0][0].samples(), 150u);
}

TEST(SegmentStream, TooShortStreamIsInsufficientData) {
    EXPECT_THROW(segment_stream({steady_stream(0, 4.9)}, {5.0, 1.0, 30.0}, 7200.0), DataError);
}

TEST(SegmentStream, AlignedAcrossPmusAndTruncatedToCommonSpan) {
    auto a = steady_stream(0, 30.0);
    auto b = steady_stream(1, 20.0);
    auto grid = segment_stream({a, b}, {5.0, 1.0, 30.0}, 7200.0);
    EXPECT_EQ(grid.n_pmus(), 2u);
    EXPECT_EQ(grid.n_columns(), 16u);  // (20 - 5) + 1
    for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t k = 0; k < grid.n_columns(); ++k) {
            ASSERT_TRUE(grid.valid[p][k]);
            EXPECT_DOUBLE_EQ(grid.windows[p][k].start_time, grid.column_starts[k]);
        }
}

TEST(SegmentStream, TilingReconstructsTheStream) {
    auto s = steady_stream(0, 15.0);
    auto grid = segment_stream({s}, {5.0, 5.0, 30.0}, 7200.0);
    ASSERT_EQ(grid.n_columns(), 3u);
    std::size_t frame = 0;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t r = 0; r < 150; ++r, ++frame)
            EXPECT_DOUBLE_EQ(grid.windows[0][k].values(r, kVa), s.frames[frame].v_a);
}

TEST(SegmentStream, GapInvalidatesTouchedWindowsOnly) {
    auto s = steady_stream(0, 20.0);
    // Remove frames in [8.0, 9.0): windows overlapping that span become invalid.
    std::vector<PmuFrame> kept;
    for (const auto& fr : s.frames)
        if (fr.timestamp < 8.0 || fr.timestamp >= 9.0) kept.push_back(fr);
    s.frames = kept;
    s.gaps.push_back({8.0 - 1.0 / 30.0, 9.0});
    auto grid = segment_stream({s}, {5.0, 1.0, 30.0}, 7200.0);
    EXPECT_FALSE(grid.valid[0][5]);   // window [5, 10) straddles the gap
    EXPECT_TRUE(grid.valid[0][0]);    // window [0, 5) untouched
}

TEST(SegmentStream, ConfigValidation) {
    EXPECT_THROW(segment_stream({steady_stream(0, 10)}, {5.0, 0.0, 30.0}, 1.0), ConfigError);
    EXPECT_THROW(segment_stream({steady_stream(0, 10)}, {5.0, 6.0, 30.0}, 1.0), ConfigError);
    EXPECT_THROW(segment_stream({steady_stream(0, 10)}, {5.1234, 1.0, 30.0}, 1.0), ConfigError);
}

TEST(BuildMatrices, StubDetectorAlwaysFiresGivesAllOnes) {
    auto grid = normalize_grid(segment_stream({steady_stream(0, 12.0), steady_stream(1, 12.0),
                                               steady_stream(2, 12.0)},
                                              {5.0, 1.0, 30.0}, 7200.0));
    std::vector<std::vector<ErrorPair>> errors(3, std::vector<ErrorPair>(grid.n_columns()));
    auto [det, cls] = build_matrices(
        grid, errors, [](const PmuWindow&, const ErrorPair&) { return 1; },
        [](const PmuWindow&, const ErrorPair&) { return 4; });
    ASSERT_EQ(det.flags.size(), 3u);
    ASSERT_EQ(det.flags[0].size(), 8u);  // (12-5)/1+1
    ASSERT_EQ(cls.labels.size(), 3u);
    for (std::size_t p = 0; p < 3; ++p)
        for (std::size_t k = 0; k < 8; ++k) {
            EXPECT_EQ(det.flags[p][k], 1);
            EXPECT_EQ(cls.labels[p][k], 4);
        }
}

TEST(BuildMatrices, MissingCellNamesPmuAndSegment) {
    auto s = steady_stream(0, 20.0);
    std::vector<PmuFrame> kept;
    for (const auto& fr : s.frames)
        if (fr.timestamp < 8.0 || fr.timestamp >= 9.0) kept.push_back(fr);
    s.frames = kept;
    auto grid = normalize_grid(segment_stream({s}, {5.0, 1.0, 30.0}, 7200.0));
    std::vector<std::vector<ErrorPair>> errors(1, std::vector<ErrorPair>(grid.n_columns()));
    try {
        build_matrices(grid, errors, [](const PmuWindow&, const ErrorPair&) { return 0; },
                       [](const PmuWindow&, const ErrorPair&) { return 0; });
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("pmu 0"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("segment"), std::string::npos);
    }
}

TEST(BuildMatrices, ClassifierOutsideRangeIsContractError) {
    auto grid = normalize_grid(segment_stream({steady_stream(0, 6.0)}, {5.0, 1.0, 30.0}, 7200.0));
    std::vector<std::vector<ErrorPair>> errors(1, std::vector<ErrorPair>(grid.n_columns()));
    EXPECT_THROW(build_matrices(grid, errors, [](const PmuWindow&, const ErrorPair&) { return 0; },
                                [](const PmuWindow&, const ErrorPair&) { return 5; }),
                 ContractError);
}

TEST(MatrixExport, DeterministicBytes) {
    DetectionMatrix det;
    det.pmu_ids = {0, 1};
    det.column_starts = {0, 1, 2};
    det.flags = {{0, 1, 0}, {1, 1, 0}};
    ClassificationMatrix cls;
    cls.pmu_ids = det.pmu_ids;
    cls.column_starts = det.column_starts;
    cls.labels = {{0, 2, 0}, {3, 3, 0}};
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pmuevent_matrix";
    fs::create_directories(dir);
    for (const char* round : {"a", "b"}) {
        write_matrix_csv((dir / (std::string("det_") + round + ".csv")).string(), det);
        write_matrix_csv((dir / (std::string("cls_") + round + ".csv")).string(), cls);
        write_detection_pgm((dir / (std::string("det_") + round + ".pgm")).string(), det);
        write_classification_ppm((dir / (std::string("cls_") + round + ".ppm")).string(), cls);
    }
    for (const char* stem : {"det_", "cls_"}) {
        EXPECT_EQ(read_file((dir / (std::string(stem) + "a.csv")).string()),
                  read_file((dir / (std::string(stem) + "b.csv")).string()));
    }
    EXPECT_EQ(read_file((dir / "det_a.pgm").string()), read_file((dir / "det_b.pgm").string()));
    EXPECT_EQ(read_file((dir / "cls_a.ppm").string()), read_file((dir / "cls_b.ppm").string()));
    // PGM header sanity.
    const std::string pgm = read_file((dir / "det_a.pgm").string());
    EXPECT_EQ(pgm.rfind("P5\n24 16\n255\n", 0), 0u);
}

TEST(SegmentStream, LongEventsOverlapAtLeastTwoWindows) {
    // Any interval of duration >= window + stride is overlapped by at least
    // two sliding positions.
    auto grid = segment_stream({steady_stream(0, 60.0)}, {5.0, 1.0, 30.0}, 7200.0);
    Pcg32 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const double len = 6.0 + rng.uniform(0, 10);  // >= window + stride
        const double a = rng.uniform(0, 60.0 - len);
        std::size_t overlapping = 0;
        for (double start : grid.column_starts)
            if (start < a + len && a < start + 5.0) ++overlapping;
        EXPECT_GE(overlapping, 2u) << "interval [" << a << ", " << a + len << ")";
    }
}

TEST(ErrorGrid, ThreadCountDoesNotChangeResults) {
    SyntheticConfig scfg;
    scfg.counts = {3, 0, 0, 0, 0, 0};
    scfg.n_pmus = 2;
    scfg.seed = 77;
    Dataset ds = generate_synthetic(scfg);
    auto grid = normalize_grid(segment_stream(ds.streams, {5.0, 1.0, 30.0}, scfg.v_rate));
    VaeGanLayout layout;
    layout.input_dim = 900;
    layout.latent_dim = 4;
    layout.encoder_hidden = {8};
    layout.decoder_hidden = {8};
    layout.discriminator_hidden = {8};
    Pcg32 rng(5);
    VaeGanModel model = make_vaegan(layout, rng);
    auto e1 = compute_error_grid(model, grid, 1);
    auto e4 = compute_error_grid(model, grid, 4);
    ASSERT_EQ(e1.size(), e4.size());
    for (std::size_t p = 0; p < e1.size(); ++p)
        for (std::size_t k = 0; k < e1[p].size(); ++k) {
            EXPECT_DOUBLE_EQ(e1[p][k].e_recon, e4[p][k].e_recon);
            EXPECT_DOUBLE_EQ(e1[p][k].e_d, e4[p][k].e_d);
        }
}
