#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"
#include "pmuevent/matrix.hpp"

namespace pmuevent {

// Fixed column order of a measurement window: phase voltage magnitudes,
// positive-sequence current magnitude, frequency, ROCOF.
enum WindowColumn : std::size_t { kVa = 0, kVb = 1, kVc = 2, kCurrent = 3, kFreq = 4, kRocof = 5 };
inline constexpr std::size_t kNumChannels = 6;
inline constexpr const char* kChannelNames[kNumChannels] = {"va", "vb", "vc", "i", "f", "df"};

// One reporting frame from a single PMU.
struct PmuFrame {
    double timestamp = 0.0;  // seconds since stream start
    int pmu_id = 0;
    double v_a = 0.0, v_b = 0.0, v_c = 0.0;  // volts
    double i = 0.0;                          // amperes, positive sequence
    double f = 0.0;                          // hertz
    double df = 0.0;                         // hertz/second
};

// N x 6 window of one PMU's signals. N = window_seconds * frame_rate exactly.
struct PmuWindow {
    RealMatrix values;     // rows = time samples, cols per WindowColumn
    int pmu_id = 0;
    double start_time = 0.0;
    double v_rate = 1.0;   // rated voltage used for per-unit conversion

    std::size_t samples() const { return values.rows; }
};

// System-level event label: 0 non-event, 1-4 known categories, 5 unknown.
struct EventLabel {
    int value = 0;

    EventLabel() = default;
    explicit EventLabel(int v) : value(v) {
        if (v < 0 || v > 5) throw ContractError("event label " + std::to_string(v) + " outside 0..5");
    }
};

// Per-window normalization: voltages are converted to per-unit with v_rate
// and mean-subtracted over the window; current, frequency, and ROCOF are
// mean-subtracted as-is. Every output column has zero mean, so signals sit
// around zero regardless of the original voltage or current level.
inline PmuWindow normalize_window(const PmuWindow& raw) {
    if (raw.values.rows < 1 || raw.values.cols != kNumChannels)
        throw DimensionError("normalize_window: expected Nx6 window with N >= 1");
    if (!(raw.v_rate > 0.0)) throw DataError("normalize_window: invalid rating v_rate <= 0");
    if (!raw.values.all_finite()) throw DataError("normalize_window: corrupt data (non-finite values)");

    PmuWindow out = raw;
    const std::size_t n = raw.values.rows;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        const bool is_voltage = (c == kVa || c == kVb || c == kVc);
        const double scale = is_voltage ? raw.v_rate : 1.0;
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += raw.values(r, c) / scale;
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) out.values(r, c) = raw.values(r, c) / scale - mean;
    }
    out.v_rate = 1.0;  // already per-unit
    return out;
}

// Flattens a window row-major (sample-major) for the model input.
inline std::vector<double> flatten_window(const PmuWindow& w) { return w.values.data; }

}  // namespace pmuevent
