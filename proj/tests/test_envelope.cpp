#include <gtest/gtest.h>

#include "pmuevent/envelope.hpp"
#include "pmuevent/rng.hpp"

using namespace pmuevent;

TEST(EnvelopeArea, ConstantSignalIsZeroEverywhere) {
    std::vector<double> signal(50, 3.25);
    for (double a : envelope_area(signal, 8, 1.0 / 30.0)) EXPECT_DOUBLE_EQ(a, 0.0);
}

TEST(EnvelopeArea, UnitStepHandValue) {
    // 4-sample window at 1 s period; windows straddling the step have
    // area = 4 * (1 - 0) * 1 = 4.
    std::vector<double> signal{0, 0, 0, 0, 1, 1, 1, 1};
    auto areas = envelope_area(signal, 4, 1.0);
    ASSERT_EQ(areas.size(), 5u);
    EXPECT_DOUBLE_EQ(areas[0], 0.0);
    EXPECT_DOUBLE_EQ(areas[1], 4.0);
    EXPECT_DOUBLE_EQ(areas[2], 4.0);
    EXPECT_DOUBLE_EQ(areas[3], 4.0);
    EXPECT_DOUBLE_EQ(areas[4], 0.0);
}

TEST(EnvelopeArea, NonNegativeTranslationInvariantAndScaling) {
    Pcg32 rng(9);
    std::vector<double> signal(120);
    for (double& v : signal) v = rng.uniform(-2, 2);
    auto base = envelope_area(signal, 10, 0.5);
    for (double a : base) EXPECT_GE(a, 0.0);

    std::vector<double> shifted = signal;
    for (double& v : shifted) v += 17.5;
    auto shifted_areas = envelope_area(shifted, 10, 0.5);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(shifted_areas[i], base[i], 1e-12);

    std::vector<double> scaled = signal;
    for (double& v : scaled) v *= 3.0;
    auto scaled_areas = envelope_area(scaled, 10, 0.5);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(scaled_areas[i], 3.0 * base[i], 1e-12);
}

TEST(EnvelopeArea, WideningTheRangeNeverShrinksArea) {
    Pcg32 rng(10);
    std::vector<double> signal(60);
    for (double& v : signal) v = rng.uniform(-1, 1);
    auto base = envelope_area(signal, 6, 1.0);
    std::vector<double> widened = signal;
    widened[30] = 5.0;  // push one sample far above the range
    auto more = envelope_area(widened, 6, 1.0);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_GE(more[i] + 1e-12, base[i]);
}

TEST(EnvelopeArea, TooShortSignalThrows) {
    EXPECT_THROW(envelope_area({1.0, 2.0}, 4, 1.0), DataError);
    EXPECT_THROW(envelope_area({1.0, 2.0, 3.0}, 1, 1.0), ConfigError);
}

namespace {

PmuWindow normalized_window_with(double spike_pu, std::size_t channel, std::size_t at) {
    PmuWindow w;
    w.v_rate = 1.0;
    w.values = RealMatrix(150, kNumChannels, 0.0);
    if (spike_pu != 0.0)
        for (std::size_t r = at; r < std::min<std::size_t>(at + 3, 150); ++r)
            w.values(r, channel) = spike_pu;
    return w;
}

}  // namespace

TEST(DetectEnvelope, SteadyWindowSilentSpikeFires) {
    EnvelopeConfig cfg;
    cfg.window_len = 30;
    cfg.area_threshold = 0.1;
    EXPECT_EQ(detect_envelope(normalized_window_with(0.0, kVa, 0), cfg, 30.0), 0);
    EXPECT_EQ(detect_envelope(normalized_window_with(0.5, kVa, 70), cfg, 30.0), 1);
}

TEST(DetectEnvelope, MultichannelSmallDriftsStayUnderThreshold) {
    // Coherent slow drift on every channel, each with a within-window range
    // far below the tuned threshold: the envelope stays silent.
    EnvelopeConfig cfg;
    cfg.window_len = 30;
    cfg.area_threshold = 0.1;
    PmuWindow w;
    w.v_rate = 1.0;
    w.values = RealMatrix(150, kNumChannels);
    for (std::size_t r = 0; r < 150; ++r)
        for (std::size_t c = 0; c < kNumChannels; ++c)
            w.values(r, c) = 0.04 * static_cast<double>(r) / 150.0;  // 0.04 pu over 5 s
    EXPECT_EQ(detect_envelope(w, cfg, 30.0), 0);
}

TEST(DetectEnvelope, ChannelMaskDisablesChannels) {
    EnvelopeConfig cfg;
    cfg.window_len = 30;
    cfg.area_threshold = 0.1;
    cfg.channels = {false, true, true, true, true, true};
    EXPECT_EQ(detect_envelope(normalized_window_with(0.5, kVa, 70), cfg, 30.0), 0);
    cfg.channels[kVa] = true;
    EXPECT_EQ(detect_envelope(normalized_window_with(0.5, kVa, 70), cfg, 30.0), 1);
}

TEST(DetectEnvelope, ConfigValidation) {
    EnvelopeConfig cfg;
    cfg.window_len = 1;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg.window_len = 10;
    cfg.area_threshold = 0.0;
    EXPECT_THROW(validate(cfg), ConfigError);
}
