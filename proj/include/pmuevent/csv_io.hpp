#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"
#include "pmuevent/kvconfig.hpp"
#include "pmuevent/pmu_data.hpp"

namespace pmuevent {

// CSV schema: header `t,pmu,va,vb,vc,i,f,df`, one frame per row.
inline constexpr const char* kCsvHeader = "t,pmu,va,vb,vc,i,f,df";

struct PmuStream {
    int pmu_id = 0;
    std::vector<PmuFrame> frames;
    // [start, end) time spans where frames are missing; windows touching a
    // gap are excluded downstream rather than imputed.
    std::vector<std::pair<double, double>> gaps;
};

struct CsvLoadResult {
    std::vector<PmuStream> streams;  // ordered by pmu_id
    std::vector<std::string> warnings;
};

namespace detail {

inline double parse_field(const std::string& tok, std::size_t lineno, const char* name) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw DataError("line " + std::to_string(lineno) + ": bad " + std::string(name) + " field '" +
                        tok + "'");
    return v;
}

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Round-trip exact formatting for persisted decision artifacts.
inline std::string format_double_exact(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Loads a frame CSV and groups frames per PMU in time order. Timestamp gaps
// (missing frames) are reported as warnings and recorded on the stream;
// non-monotonic timestamps within one PMU are an error.
inline CsvLoadResult load_csv_stream(const std::string& path, double frame_rate) {
    if (!(frame_rate > 0.0)) throw ConfigError("load_csv_stream: frame_rate must be > 0");
    std::ifstream is(path);
    if (!is) throw IoError("cannot open csv: " + path);
    std::string line;
    if (!std::getline(is, line)) throw DataError(path + ": empty file, missing header");
    {
        auto fields = detail::split_csv_row(line);
        std::string joined;
        for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + fields[i];
        if (joined != kCsvHeader)
            throw DataError(path + ": header mismatch, expected '" + std::string(kCsvHeader) + "'");
    }
    const double period = 1.0 / frame_rate;
    std::map<int, PmuStream> by_pmu;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = detail::split_csv_row(line);
        if (fields.size() != 8)
            throw DataError("line " + std::to_string(lineno) + ": expected 8 fields, got " +
                            std::to_string(fields.size()));
        PmuFrame frame;
        frame.timestamp = detail::parse_field(fields[0], lineno, "t");
        frame.pmu_id = static_cast<int>(detail::parse_field(fields[1], lineno, "pmu"));
        frame.v_a = detail::parse_field(fields[2], lineno, "va");
        frame.v_b = detail::parse_field(fields[3], lineno, "vb");
        frame.v_c = detail::parse_field(fields[4], lineno, "vc");
        frame.i = detail::parse_field(fields[5], lineno, "i");
        frame.f = detail::parse_field(fields[6], lineno, "f");
        frame.df = detail::parse_field(fields[7], lineno, "df");
        auto& stream = by_pmu[frame.pmu_id];
        stream.pmu_id = frame.pmu_id;
        stream.frames.push_back(frame);
    }

    CsvLoadResult result;
    for (auto& [id, stream] : by_pmu) {
        for (std::size_t k = 1; k < stream.frames.size(); ++k) {
            const double dt = stream.frames[k].timestamp - stream.frames[k - 1].timestamp;
            if (dt <= 0.0)
                throw DataError("pmu " + std::to_string(id) + ": non-monotonic timestamp at t=" +
                                detail::format_double(stream.frames[k].timestamp));
            if (dt > 1.5 * period) {
                stream.gaps.emplace_back(stream.frames[k - 1].timestamp, stream.frames[k].timestamp);
                result.warnings.push_back("pmu " + std::to_string(id) + ": gap of " +
                                          detail::format_double(dt) + " s after t=" +
                                          detail::format_double(stream.frames[k - 1].timestamp));
            }
        }
        result.streams.push_back(std::move(stream));
    }
    return result;
}

inline void write_csv_stream(const std::string& path, const std::vector<PmuFrame>& frames) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open csv for writing: " + path);
    os << kCsvHeader << "\n";
    for (const auto& fr : frames) {
        os << detail::format_double(fr.timestamp) << ',' << fr.pmu_id << ','
           << detail::format_double(fr.v_a) << ',' << detail::format_double(fr.v_b) << ','
           << detail::format_double(fr.v_c) << ',' << detail::format_double(fr.i) << ','
           << detail::format_double(fr.f) << ',' << detail::format_double(fr.df) << "\n";
    }
    if (!os) throw IoError("failed writing csv: " + path);
}

// --- labeled dataset directory -------------------------------------------
// Layout: one `pmu_<id>.csv` per PMU, `labels.csv` with per-segment ground
// truth, and `dataset.meta` (key-value) describing rates and geometry.

struct LabelRow {
    int pmu = 0;
    double segment_start_s = 0.0;
    int label = 0;
};

struct DatasetMeta {
    double frame_rate = 30.0;
    double v_rate = 7200.0;
    double window_seconds = 5.0;
    double segment_seconds = 10.0;
    int n_pmus = 1;
};

struct Dataset {
    DatasetMeta meta;
    std::vector<PmuStream> streams;
    std::vector<LabelRow> labels;
};

inline void write_labels_csv(const std::string& path, const std::vector<LabelRow>& labels) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open labels csv for writing: " + path);
    os << "pmu,segment_start_s,label\n";
    for (const auto& row : labels)
        os << row.pmu << ',' << detail::format_double(row.segment_start_s) << ',' << row.label << "\n";
    if (!os) throw IoError("failed writing labels csv: " + path);
}

inline std::vector<LabelRow> read_labels_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open labels csv: " + path);
    std::string line;
    if (!std::getline(is, line)) throw DataError(path + ": empty labels file");
    std::vector<LabelRow> labels;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = detail::split_csv_row(line);
        if (fields.size() != 3)
            throw DataError("labels line " + std::to_string(lineno) + ": expected 3 fields");
        LabelRow row;
        row.pmu = static_cast<int>(detail::parse_field(fields[0], lineno, "pmu"));
        row.segment_start_s = detail::parse_field(fields[1], lineno, "segment_start_s");
        row.label = static_cast<int>(detail::parse_field(fields[2], lineno, "label"));
        if (row.label < 0 || row.label > 5)
            throw DataError("labels line " + std::to_string(lineno) + ": label outside 0..5");
        labels.push_back(row);
    }
    return labels;
}

inline void write_dataset_meta(const std::string& path, const DatasetMeta& meta) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open meta file for writing: " + path);
    os << "frame_rate = " << detail::format_double(meta.frame_rate) << "\n"
       << "v_rate = " << detail::format_double(meta.v_rate) << "\n"
       << "window_seconds = " << detail::format_double(meta.window_seconds) << "\n"
       << "segment_seconds = " << detail::format_double(meta.segment_seconds) << "\n"
       << "n_pmus = " << meta.n_pmus << "\n";
    if (!os) throw IoError("failed writing meta file: " + path);
}

inline DatasetMeta read_dataset_meta(const std::string& path) {
    KvConfig cfg = KvConfig::parse_file(path);
    cfg.require_known_keys({"frame_rate", "v_rate", "window_seconds", "segment_seconds", "n_pmus"});
    DatasetMeta meta;
    meta.frame_rate = cfg.get_double("frame_rate", meta.frame_rate);
    meta.v_rate = cfg.get_double("v_rate", meta.v_rate);
    meta.window_seconds = cfg.get_double("window_seconds", meta.window_seconds);
    meta.segment_seconds = cfg.get_double("segment_seconds", meta.segment_seconds);
    meta.n_pmus = static_cast<int>(cfg.get_int("n_pmus", meta.n_pmus));
    return meta;
}

inline Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.meta = read_dataset_meta((fs::path(dir) / "dataset.meta").string());
    for (int id = 0; id < ds.meta.n_pmus; ++id) {
        const std::string path = (fs::path(dir) / ("pmu_" + std::to_string(id) + ".csv")).string();
        auto loaded = load_csv_stream(path, ds.meta.frame_rate);
        if (loaded.streams.size() != 1 || loaded.streams[0].pmu_id != id)
            throw DataError(path + ": expected exactly pmu " + std::to_string(id));
        ds.streams.push_back(std::move(loaded.streams[0]));
    }
    ds.labels = read_labels_csv((fs::path(dir) / "labels.csv").string());
    return ds;
}

}  // namespace pmuevent
