#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "pmuevent/csv_io.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/pmu_data.hpp"
#include "pmuevent/vaegan.hpp"

namespace pmuevent {

struct SlidingWindowConfig {
    double window_seconds = 5.0;
    double stride_seconds = 1.0;
    double frame_rate = 30.0;
};

inline void validate(const SlidingWindowConfig& cfg) {
    if (!(cfg.stride_seconds > 0.0) || cfg.stride_seconds > cfg.window_seconds)
        throw ConfigError("sliding window: need 0 < stride <= window");
    const double n = cfg.window_seconds * cfg.frame_rate;
    if (std::fabs(n - std::round(n)) > 1e-9)
        throw ConfigError("sliding window: window_seconds * frame_rate must be integral");
    const double s = cfg.stride_seconds * cfg.frame_rate;
    if (std::fabs(s - std::round(s)) > 1e-9)
        throw ConfigError("sliding window: stride_seconds * frame_rate must be integral");
}

// Raw (un-normalized) windows for every PMU, aligned across PMUs by start
// time. `valid` marks cells whose frames were complete; windows touching a
// recorded stream gap stay invalid and are never imputed.
struct WindowGrid {
    std::vector<int> pmu_ids;
    std::vector<double> column_starts;                 // stride-spaced
    std::vector<std::vector<PmuWindow>> windows;       // [pmu][column]
    std::vector<std::vector<bool>> valid;              // [pmu][column]

    std::size_t n_pmus() const { return windows.size(); }
    std::size_t n_columns() const { return column_starts.size(); }
};

// Segments multi-PMU streams into overlapping windows. Streams of unequal
// length are truncated to the shortest common span. Segment count is
// floor((T - window)/stride) + 1.
inline WindowGrid segment_stream(const std::vector<PmuStream>& streams, const SlidingWindowConfig& cfg,
                                 double v_rate) {
    validate(cfg);
    if (streams.empty()) throw DataError("segment_stream: no streams");
    double common_begin = -1e300, common_end = 1e300;
    const double period = 1.0 / cfg.frame_rate;
    for (const auto& s : streams) {
        if (s.frames.empty()) throw DataError("segment_stream: empty stream for pmu");
        common_begin = std::max(common_begin, s.frames.front().timestamp);
        common_end = std::min(common_end, s.frames.back().timestamp + period);
    }
    const double span = common_end - common_begin;
    if (span + 1e-9 < cfg.window_seconds)
        throw DataError("segment_stream: stream span " + std::to_string(span) +
                        " s is shorter than one window");
    const std::size_t n_cols =
        static_cast<std::size_t>(std::floor((span - cfg.window_seconds) / cfg.stride_seconds + 1e-9)) + 1;
    const std::size_t win_frames = static_cast<std::size_t>(std::llround(cfg.window_seconds * cfg.frame_rate));

    WindowGrid grid;
    grid.column_starts.resize(n_cols);
    for (std::size_t k = 0; k < n_cols; ++k)
        grid.column_starts[k] = common_begin + static_cast<double>(k) * cfg.stride_seconds;

    for (const auto& s : streams) {
        grid.pmu_ids.push_back(s.pmu_id);
        std::vector<PmuWindow> row(n_cols);
        std::vector<bool> ok(n_cols, false);
        const double t0 = s.frames.front().timestamp;
        for (std::size_t k = 0; k < n_cols; ++k) {
            const double start = grid.column_starts[k];
            const auto first = static_cast<std::ptrdiff_t>(std::llround((start - t0) * cfg.frame_rate));
            if (first < 0 || static_cast<std::size_t>(first) + win_frames > s.frames.size()) continue;
            PmuWindow w;
            w.pmu_id = s.pmu_id;
            w.start_time = start;
            w.v_rate = v_rate;
            w.values = RealMatrix(win_frames, kNumChannels);
            bool contiguous = true;
            for (std::size_t r = 0; r < win_frames; ++r) {
                const PmuFrame& fr = s.frames[static_cast<std::size_t>(first) + r];
                const double expect = start + static_cast<double>(r) * period;
                if (std::fabs(fr.timestamp - expect) > period * 0.25) {
                    contiguous = false;  // a gap or irregular spacing intersects this window
                    break;
                }
                w.values(r, kVa) = fr.v_a;
                w.values(r, kVb) = fr.v_b;
                w.values(r, kVc) = fr.v_c;
                w.values(r, kCurrent) = fr.i;
                w.values(r, kFreq) = fr.f;
                w.values(r, kRocof) = fr.df;
            }
            if (!contiguous) continue;
            row[k] = std::move(w);
            ok[k] = true;
        }
        grid.windows.push_back(std::move(row));
        grid.valid.push_back(std::move(ok));
    }
    return grid;
}

// One raw window cut from a stream at an exact start time; throws when the
// frames are absent or not contiguous.
inline PmuWindow extract_window(const PmuStream& stream, double start, double window_seconds,
                                double frame_rate, double v_rate) {
    if (stream.frames.empty()) throw DataError("extract_window: empty stream");
    const double period = 1.0 / frame_rate;
    const double t0 = stream.frames.front().timestamp;
    const auto first = static_cast<std::ptrdiff_t>(std::llround((start - t0) * frame_rate));
    const auto n = static_cast<std::size_t>(std::llround(window_seconds * frame_rate));
    if (first < 0 || static_cast<std::size_t>(first) + n > stream.frames.size())
        throw DataError("extract_window: window at t=" + std::to_string(start) + " out of range");
    PmuWindow w;
    w.pmu_id = stream.pmu_id;
    w.start_time = start;
    w.v_rate = v_rate;
    w.values = RealMatrix(n, kNumChannels);
    for (std::size_t r = 0; r < n; ++r) {
        const PmuFrame& fr = stream.frames[static_cast<std::size_t>(first) + r];
        if (std::fabs(fr.timestamp - (start + static_cast<double>(r) * period)) > period * 0.25)
            throw DataError("extract_window: gap inside window at t=" + std::to_string(start));
        w.values(r, kVa) = fr.v_a;
        w.values(r, kVb) = fr.v_b;
        w.values(r, kVc) = fr.v_c;
        w.values(r, kCurrent) = fr.i;
        w.values(r, kFreq) = fr.f;
        w.values(r, kRocof) = fr.df;
    }
    return w;
}

inline WindowGrid normalize_grid(const WindowGrid& grid) {
    WindowGrid out = grid;
    for (std::size_t p = 0; p < grid.n_pmus(); ++p)
        for (std::size_t k = 0; k < grid.n_columns(); ++k)
            if (grid.valid[p][k]) out.windows[p][k] = normalize_window(grid.windows[p][k]);
    return out;
}

// Per-cell error extraction, fanned out over a bounded worker pool. Workers
// write to disjoint indices, so results are independent of thread count.
inline std::vector<std::vector<ErrorPair>> compute_error_grid(const VaeGanModel& model,
                                                              const WindowGrid& normalized,
                                                              unsigned n_threads = 0) {
    const std::size_t n_p = normalized.n_pmus(), n_c = normalized.n_columns();
    std::vector<std::vector<ErrorPair>> errors(n_p, std::vector<ErrorPair>(n_c));
    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t total = n_p * n_c;
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t f = begin; f < end; ++f) {
            const std::size_t p = f / n_c, k = f % n_c;
            if (!normalized.valid[p][k]) continue;
            errors[p][k] = infer_errors(model, normalized.windows[p][k].values.data);
        }
    };
    if (n_threads <= 1 || total < 2) {
        worker(0, total);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (total + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t begin = std::min(total, static_cast<std::size_t>(t) * chunk);
            const std::size_t end = std::min(total, begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    return errors;
}

// PMUs x segments grid of binary flags.
struct DetectionMatrix {
    std::vector<int> pmu_ids;
    std::vector<double> column_starts;
    std::vector<std::vector<int>> flags;  // entries in {0,1}
};

// Same shape, entries in {0..4}.
struct ClassificationMatrix {
    std::vector<int> pmu_ids;
    std::vector<double> column_starts;
    std::vector<std::vector<int>> labels;
};

// Detector and classifier closures get the normalized window alongside its
// error pair so rule-based, hull-based, and envelope detectors share one
// interface.
using DetectorFn = std::function<int(const PmuWindow&, const ErrorPair&)>;
using ClassifierFn = std::function<int(const PmuWindow&, const ErrorPair&)>;

inline std::pair<DetectionMatrix, ClassificationMatrix> build_matrices(
    const WindowGrid& normalized, const std::vector<std::vector<ErrorPair>>& errors,
    const DetectorFn& detector, const ClassifierFn& classifier) {
    const std::size_t n_p = normalized.n_pmus(), n_c = normalized.n_columns();
    if (errors.size() != n_p) throw DimensionError("build_matrices: error grid row count mismatch");
    DetectionMatrix det;
    ClassificationMatrix cls;
    det.pmu_ids = cls.pmu_ids = normalized.pmu_ids;
    det.column_starts = cls.column_starts = normalized.column_starts;
    det.flags.assign(n_p, std::vector<int>(n_c, 0));
    cls.labels.assign(n_p, std::vector<int>(n_c, 0));
    for (std::size_t p = 0; p < n_p; ++p) {
        if (errors[p].size() != n_c) throw DimensionError("build_matrices: error grid column mismatch");
        for (std::size_t k = 0; k < n_c; ++k) {
            if (!normalized.valid[p][k])
                throw DataError("build_matrices: incomplete matrix, missing cell (pmu " +
                                std::to_string(normalized.pmu_ids[p]) + ", segment " + std::to_string(k) +
                                ")");
            const PmuWindow& w = normalized.windows[p][k];
            det.flags[p][k] = detector(w, errors[p][k]) ? 1 : 0;
            const int label = classifier(w, errors[p][k]);
            if (label < 0 || label > 4)
                throw ContractError("build_matrices: classifier emitted label outside 0..4");
            cls.labels[p][k] = label;
        }
    }
    return {std::move(det), std::move(cls)};
}

// --- exports -----------------------------------------------------------------

namespace detail {

template <typename M>
inline void write_matrix_csv_impl(const std::string& path, const M& m,
                                  const std::vector<std::vector<int>>& cells) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open matrix csv for writing: " + path);
    os << "pmu";
    for (double t : m.column_starts) os << ',' << format_double(t);
    os << "\n";
    for (std::size_t p = 0; p < cells.size(); ++p) {
        os << m.pmu_ids[p];
        for (int v : cells[p]) os << ',' << v;
        os << "\n";
    }
    if (!os) throw IoError("failed writing matrix csv: " + path);
}

inline constexpr int kCellPixels = 8;

}  // namespace detail

inline void write_matrix_csv(const std::string& path, const DetectionMatrix& m) {
    detail::write_matrix_csv_impl(path, m, m.flags);
}

inline void write_matrix_csv(const std::string& path, const ClassificationMatrix& m) {
    detail::write_matrix_csv_impl(path, m, m.labels);
}

// Binary PGM, black cells = flagged segments.
inline void write_detection_pgm(const std::string& path, const DetectionMatrix& m) {
    const std::size_t rows = m.flags.size(), cols = m.column_starts.size();
    const int s = detail::kCellPixels;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open pgm for writing: " + path);
    os << "P5\n" << cols * s << " " << rows * s << "\n255\n";
    for (std::size_t p = 0; p < rows; ++p)
        for (int py = 0; py < s; ++py)
            for (std::size_t k = 0; k < cols; ++k) {
                const char pix = m.flags[p][k] ? '\x00' : '\xff';
                for (int px = 0; px < s; ++px) os.put(pix);
            }
    if (!os) throw IoError("failed writing pgm: " + path);
}

// Binary PPM, one color per class (white = non-event).
inline void write_classification_ppm(const std::string& path, const ClassificationMatrix& m) {
    static constexpr unsigned char palette[6][3] = {
        {255, 255, 255},  // 0 non-event
        {220, 50, 47},    // 1
        {38, 139, 210},   // 2
        {133, 153, 0},    // 3
        {203, 75, 22},    // 4
        {108, 113, 196},  // 5 (unknown, only in fused exports)
    };
    const std::size_t rows = m.labels.size(), cols = m.column_starts.size();
    const int s = detail::kCellPixels;
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open ppm for writing: " + path);
    os << "P6\n" << cols * s << " " << rows * s << "\n255\n";
    for (std::size_t p = 0; p < rows; ++p)
        for (int py = 0; py < s; ++py)
            for (std::size_t k = 0; k < cols; ++k) {
                const unsigned char* rgb = palette[std::clamp(m.labels[p][k], 0, 5)];
                for (int px = 0; px < s; ++px)
                    os.write(reinterpret_cast<const char*>(rgb), 3);
            }
    if (!os) throw IoError("failed writing ppm: " + path);
}

}  // namespace pmuevent
