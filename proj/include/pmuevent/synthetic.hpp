#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pmuevent/csv_io.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/pmu_data.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

// Synthetic labeled dataset generator. Streams are built from consecutive
// labeled segments; each nonzero segment carries one event strictly inside
// its interval so sliding windows drawn from a segment never see a
// neighbor's event. Event signatures are additive on steady state:
//   1 - three-phase voltage sag (flat dip)
//   2 - frequency excursion (half-sine dip, ROCOF from its derivative)
//   3 - sustained voltage/current oscillation
//   4 - positive-sequence current step
//   5 - held-out composite: alternating sag/oscillation sub-phases with a
//       per-instance severity draw and a growing envelope; never used for
//       classifier training.
// Severities default to well-separated magnitudes so the known types occupy
// disjoint bands in the model's error space, while type 5 sweeps the space
// between bands.
struct SyntheticConfig {
    double frame_rate = 30.0;      // frames per second
    double window_seconds = 5.0;   // model window length
    double segment_seconds = 10.0; // labeled segment length (>= window)
    int n_pmus = 1;
    std::array<int, 6> counts{};   // segments per label 0..5
    std::uint64_t seed = 42;

    double v_rate = 7200.0;  // volts
    double i_base = 100.0;   // amperes
    double f_base = 60.0;    // hertz

    // Noise standard deviations are chosen so every normalized channel has
    // the same noise floor: voltages get noise_sigma per-unit, the other
    // channels noise_sigma in their own unit.
    double noise_sigma = 0.004;

    double event_seconds = 4.0;    // event interval inside its segment (types 1-4)
    double onset_jitter_s = 0.25;  // +- shift of the event interval
    double pmu_amp_jitter = 0.10;  // +- relative severity spread across PMUs

    // Per-type severities, spaced so each type occupies its own error band.
    double sag_depth_pu = 0.12;
    double freq_dev_hz = 0.26;
    double osc_v_amp_pu = 0.30;
    double osc_i_amp = 0.30;
    double osc_freq_hz = 2.0;
    double i_step = 1.0;

    // Type-5 composite controls. The composite runs longer than one window,
    // so no sliding position sees the whole event: its envelope grows
    // through the event and then jumps to a short capped burst near the
    // end. Successive windows therefore see ever-larger severities that
    // walk across the known types' bands, and the windows sharing the final
    // burst sit several bands above their predecessors.
    double t5_event_seconds = 8.0;
    double t5_sag_base_pu = 0.012;
    double t5_osc_base_pu = 0.012;
    double t5_osc_freq_hz = 3.0;
    double t5_subphase_s = 0.8;
    double t5_growth_per_s = 1.5;   // envelope growth factor per second
    double t5_cap_time_s = 7.2;     // envelope switches to the capped burst here
    double t5_cap_jump = 3.5;       // burst level over the pre-burst envelope
    double t5_scale_lo = 0.7;       // per-instance severity multiplier range
    double t5_scale_hi = 1.4;       //   (log-uniform)

    int total_segments() const {
        int n = 0;
        for (int c : counts) n += c;
        return n;
    }
};

namespace detail {

struct EventInstance {
    int label = 0;
    double start = 0.0;  // absolute seconds
    double end = 0.0;
    double t5_scale = 1.0;
    double t5_phase = 0.0;  // 0 -> sag first, 1 -> oscillation first
};

// Additive deltas for one time point of one event, before per-PMU jitter.
struct SignalDelta {
    double dv_pu = 0.0;  // applied to all three phase voltages, per-unit
    double di = 0.0;     // amperes
    double df_hz = 0.0;  // hertz on the frequency channel
    double drocof = 0.0; // hertz/second on the ROCOF channel
};

inline SignalDelta event_delta(const SyntheticConfig& cfg, const EventInstance& ev, double t) {
    SignalDelta d;
    if (t < ev.start || t >= ev.end) return d;
    const double rel = t - ev.start;
    const double dur = ev.end - ev.start;
    switch (ev.label) {
        case 1:
            d.dv_pu = -cfg.sag_depth_pu;
            break;
        case 2: {
            d.df_hz = -cfg.freq_dev_hz * std::sin(M_PI * rel / dur);
            d.drocof = -cfg.freq_dev_hz * (M_PI / dur) * std::cos(M_PI * rel / dur);
            break;
        }
        case 3: {
            const double s = std::sin(2.0 * M_PI * cfg.osc_freq_hz * rel);
            d.dv_pu = cfg.osc_v_amp_pu * s;
            d.di = cfg.osc_i_amp * s;
            break;
        }
        case 4:
            d.di = cfg.i_step;
            break;
        case 5: {
            double env = ev.t5_scale * std::pow(cfg.t5_growth_per_s, std::min(rel, cfg.t5_cap_time_s));
            if (rel >= cfg.t5_cap_time_s) env *= cfg.t5_cap_jump;
            const int sub = static_cast<int>(std::floor(rel / cfg.t5_subphase_s));
            const bool sag_phase = ((sub + static_cast<int>(ev.t5_phase)) % 2) == 0;
            if (sag_phase) {
                d.dv_pu = -cfg.t5_sag_base_pu * env;
            } else {
                const double s = std::sin(2.0 * M_PI * cfg.t5_osc_freq_hz * rel);
                d.dv_pu = cfg.t5_osc_base_pu * env * s;
                d.di = cfg.t5_osc_base_pu * env * s * (cfg.osc_i_amp / cfg.osc_v_amp_pu);
            }
            break;
        }
        default:
            break;
    }
    return d;
}

}  // namespace detail

inline void validate(const SyntheticConfig& cfg) {
    if (!(cfg.frame_rate > 0.0)) throw ConfigError("synthetic: frame_rate must be > 0");
    for (int c : cfg.counts)
        if (c < 0) throw ConfigError("synthetic: counts must be >= 0");
    if (cfg.total_segments() == 0) throw ConfigError("synthetic: empty config (zero total count)");
    if (cfg.n_pmus < 1) throw ConfigError("synthetic: n_pmus must be >= 1");
    if (cfg.segment_seconds < cfg.window_seconds)
        throw ConfigError("synthetic: segment_seconds must be >= window_seconds");
    if (cfg.event_seconds + 2.0 * cfg.onset_jitter_s >= cfg.segment_seconds ||
        cfg.t5_event_seconds + 2.0 * cfg.onset_jitter_s >= cfg.segment_seconds)
        throw ConfigError("synthetic: event does not fit inside a segment");
    const double n = cfg.window_seconds * cfg.frame_rate;
    if (std::fabs(n - std::round(n)) > 1e-9)
        throw ConfigError("synthetic: window_seconds * frame_rate must be integral");
    const double m = cfg.segment_seconds * cfg.frame_rate;
    if (std::fabs(m - std::round(m)) > 1e-9)
        throw ConfigError("synthetic: segment_seconds * frame_rate must be integral");
}

// Deterministic under a fixed seed: one master RNG lays out segments and
// event severities, then each PMU gets its own noise RNG, so outputs are
// independent of evaluation order.
inline Dataset generate_synthetic(const SyntheticConfig& cfg) {
    validate(cfg);

    Pcg32 master(cfg.seed);
    std::vector<int> segment_labels;
    for (int label = 0; label < 6; ++label)
        for (int k = 0; k < cfg.counts[static_cast<std::size_t>(label)]; ++k)
            segment_labels.push_back(label);
    master.shuffle(segment_labels);

    std::vector<detail::EventInstance> events(segment_labels.size());
    for (std::size_t s = 0; s < segment_labels.size(); ++s) {
        detail::EventInstance& ev = events[s];
        ev.label = segment_labels[s];
        if (ev.label == 0) continue;
        const double seg_start = static_cast<double>(s) * cfg.segment_seconds;
        const double duration = ev.label == 5 ? cfg.t5_event_seconds : cfg.event_seconds;
        const double slack = (cfg.segment_seconds - duration) / 2.0;
        const double jitter = cfg.onset_jitter_s * (2.0 * master.uniform() - 1.0);
        ev.start = seg_start + slack + jitter;
        ev.end = ev.start + duration;
        if (ev.label == 5) {
            const double lo = std::log(cfg.t5_scale_lo), hi = std::log(cfg.t5_scale_hi);
            ev.t5_scale = std::exp(master.uniform(lo, hi));
            ev.t5_phase = master.uniform() < 0.5 ? 0.0 : 1.0;
        }
    }

    // Per-(segment, pmu) severity jitter, drawn once in fixed order.
    const int n_segments = static_cast<int>(segment_labels.size());
    std::vector<double> pmu_jitter(static_cast<std::size_t>(n_segments) * cfg.n_pmus, 1.0);
    for (int s = 0; s < n_segments; ++s)
        for (int p = 0; p < cfg.n_pmus; ++p)
            pmu_jitter[static_cast<std::size_t>(s) * cfg.n_pmus + p] =
                1.0 + cfg.pmu_amp_jitter * (2.0 * master.uniform() - 1.0);

    Dataset ds;
    ds.meta.frame_rate = cfg.frame_rate;
    ds.meta.v_rate = cfg.v_rate;
    ds.meta.window_seconds = cfg.window_seconds;
    ds.meta.segment_seconds = cfg.segment_seconds;
    ds.meta.n_pmus = cfg.n_pmus;

    const std::size_t frames_per_segment =
        static_cast<std::size_t>(std::llround(cfg.segment_seconds * cfg.frame_rate));
    const std::size_t total_frames = frames_per_segment * static_cast<std::size_t>(n_segments);

    for (int p = 0; p < cfg.n_pmus; ++p) {
        Pcg32 noise_rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(p + 1)));
        PmuStream stream;
        stream.pmu_id = p;
        stream.frames.reserve(total_frames);
        for (std::size_t k = 0; k < total_frames; ++k) {
            const double t = static_cast<double>(k) / cfg.frame_rate;
            const int seg = static_cast<int>(k / frames_per_segment);
            const detail::EventInstance& ev = events[static_cast<std::size_t>(seg)];
            detail::SignalDelta d;
            if (ev.label != 0) d = detail::event_delta(cfg, ev, t);
            const double amp = pmu_jitter[static_cast<std::size_t>(seg) * cfg.n_pmus + p];

            PmuFrame fr;
            fr.timestamp = t;
            fr.pmu_id = p;
            const double dv = d.dv_pu * amp * cfg.v_rate;
            fr.v_a = cfg.v_rate + dv + cfg.noise_sigma * cfg.v_rate * noise_rng.gaussian();
            fr.v_b = cfg.v_rate + dv + cfg.noise_sigma * cfg.v_rate * noise_rng.gaussian();
            fr.v_c = cfg.v_rate + dv + cfg.noise_sigma * cfg.v_rate * noise_rng.gaussian();
            fr.i = cfg.i_base + d.di * amp + cfg.noise_sigma * noise_rng.gaussian();
            fr.f = cfg.f_base + d.df_hz * amp + cfg.noise_sigma * noise_rng.gaussian();
            fr.df = d.drocof * amp + cfg.noise_sigma * noise_rng.gaussian();
            stream.frames.push_back(fr);
        }
        ds.streams.push_back(std::move(stream));
    }

    for (int p = 0; p < cfg.n_pmus; ++p)
        for (int s = 0; s < n_segments; ++s)
            ds.labels.push_back({p, static_cast<double>(s) * cfg.segment_seconds,
                                 segment_labels[static_cast<std::size_t>(s)]});
    return ds;
}

inline void write_dataset(const Dataset& ds, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_dataset_meta((fs::path(dir) / "dataset.meta").string(), ds.meta);
    for (const auto& stream : ds.streams)
        write_csv_stream((fs::path(dir) / ("pmu_" + std::to_string(stream.pmu_id) + ".csv")).string(),
                         stream.frames);
    write_labels_csv((fs::path(dir) / "labels.csv").string(), ds.labels);
}

}  // namespace pmuevent
