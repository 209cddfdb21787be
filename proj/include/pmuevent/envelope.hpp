#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

#include "pmuevent/errors.hpp"
#include "pmuevent/pmu_data.hpp"

namespace pmuevent {

// Max-Envelope baseline: scores a signal by the area between its moving
// minimum and maximum bounds and flags a window when any enabled channel's
// area exceeds a threshold.
struct EnvelopeConfig {
    std::size_t window_len = 30;  // moving-window length in samples
    double area_threshold = 0.1;
    std::array<bool, kNumChannels> channels{true, true, true, true, true, true};
};

inline void validate(const EnvelopeConfig& cfg) {
    if (cfg.window_len < 2) throw ConfigError("envelope: window_len must be >= 2");
    if (!(cfg.area_threshold > 0.0)) throw ConfigError("envelope: threshold must be > 0");
}

// Area sequence: at each valid position the moving extrema over the trailing
// window give area = (max - min) * window_len * sample_period. Extrema are
// exact, via monotone deques in linear time.
inline std::vector<double> envelope_area(const std::vector<double>& signal, std::size_t window_len,
                                         double sample_period) {
    if (window_len < 2) throw ConfigError("envelope_area: window_len must be >= 2");
    if (signal.size() < window_len)
        throw DataError("envelope_area: signal shorter than the moving window");
    std::vector<double> areas;
    areas.reserve(signal.size() - window_len + 1);
    std::deque<std::size_t> maxq, minq;
    for (std::size_t i = 0; i < signal.size(); ++i) {
        while (!maxq.empty() && signal[maxq.back()] <= signal[i]) maxq.pop_back();
        maxq.push_back(i);
        while (!minq.empty() && signal[minq.back()] >= signal[i]) minq.pop_back();
        minq.push_back(i);
        if (i + 1 >= window_len) {
            const std::size_t lo = i + 1 - window_len;
            while (maxq.front() < lo) maxq.pop_front();
            while (minq.front() < lo) minq.pop_front();
            areas.push_back((signal[maxq.front()] - signal[minq.front()]) *
                            static_cast<double>(window_len) * sample_period);
        }
    }
    return areas;
}

// The window's envelope score: the largest area over all enabled channels.
inline double envelope_score(const PmuWindow& window, const EnvelopeConfig& cfg, double frame_rate) {
    if (window.values.rows < cfg.window_len)
        throw DataError("envelope_score: window shorter than the moving window");
    const double period = 1.0 / frame_rate;
    double worst = 0.0;
    std::vector<double> channel(window.values.rows);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        if (!cfg.channels[c]) continue;
        for (std::size_t r = 0; r < window.values.rows; ++r) channel[r] = window.values(r, c);
        for (double a : envelope_area(channel, cfg.window_len, period)) worst = std::max(worst, a);
    }
    return worst;
}

inline int detect_envelope(const PmuWindow& window, const EnvelopeConfig& cfg, double frame_rate) {
    validate(cfg);
    return envelope_score(window, cfg, frame_rate) > cfg.area_threshold ? 1 : 0;
}

}  // namespace pmuevent

#include <fstream>

#include "pmuevent/kvconfig.hpp"

namespace pmuevent {

inline void save_envelope_config(const EnvelopeConfig& cfg, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open envelope config for writing: " + path);
    os.precision(17);
    os << "window_len = " << cfg.window_len << "\n";
    os << "area_threshold = " << cfg.area_threshold << "\n";
    os << "channels = ";
    for (std::size_t c = 0; c < kNumChannels; ++c) os << (cfg.channels[c] ? 1 : 0) << (c + 1 < kNumChannels ? "," : "\n");
}

inline EnvelopeConfig load_envelope_config(const std::string& path) {
    KvConfig kv = KvConfig::parse_file(path);
    kv.require_known_keys({"window_len", "area_threshold", "channels"});
    EnvelopeConfig cfg;
    cfg.window_len = static_cast<std::size_t>(kv.get_int("window_len", static_cast<long>(cfg.window_len)));
    cfg.area_threshold = kv.get_double("area_threshold", cfg.area_threshold);
    auto mask = kv.get_double_list("channels", {1, 1, 1, 1, 1, 1});
    if (mask.size() != kNumChannels) throw ConfigError("envelope channels mask needs 6 entries");
    for (std::size_t c = 0; c < kNumChannels; ++c) cfg.channels[c] = mask[c] != 0.0;
    validate(cfg);
    return cfg;
}

}  // namespace pmuevent
