#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pmuevent/classifier.hpp"
#include "pmuevent/csv_io.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/fusion.hpp"

namespace pmuevent {

// --- scoring -------------------------------------------------------------------

struct ConfusionMatrix {
    std::size_t k = 0;
    std::vector<long> counts;  // k x k row-major, rows = true class

    explicit ConfusionMatrix(std::size_t classes = 0) : k(classes), counts(classes * classes, 0) {}
    long& at(std::size_t truth, std::size_t pred) { return counts[truth * k + pred]; }
    long at(std::size_t truth, std::size_t pred) const { return counts[truth * k + pred]; }
    long total() const {
        long t = 0;
        for (long c : counts) t += c;
        return t;
    }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_defined = true;  // false when no predictions of this class
    bool recall_defined = true;     // false when the class is absent from truths
};

struct MetricsReport {
    std::string scenario;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    bool has_detection_accuracy = false;
    double detection_accuracy = 0.0;
};

inline std::pair<ConfusionMatrix, MetricsReport> score(const std::vector<int>& predictions,
                                                       const std::vector<int>& truths, std::size_t k) {
    if (predictions.size() != truths.size())
        throw DataError("score: predictions/truths length mismatch");
    if (predictions.empty()) throw DataError("score: empty input");
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] < 0 || static_cast<std::size_t>(predictions[i]) >= k ||
            truths[i] < 0 || static_cast<std::size_t>(truths[i]) >= k)
            throw DataError("score: label outside 0.." + std::to_string(k - 1));
        ++cm.at(static_cast<std::size_t>(truths[i]), static_cast<std::size_t>(predictions[i]));
    }
    MetricsReport report;
    long diag = 0;
    for (std::size_t c = 0; c < k; ++c) diag += cm.at(c, c);
    report.accuracy = static_cast<double>(diag) / static_cast<double>(cm.total());
    report.per_class.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        long tp = cm.at(c, c), pred_c = 0, true_c = 0;
        for (std::size_t r = 0; r < k; ++r) {
            pred_c += cm.at(r, c);
            true_c += cm.at(c, r);
        }
        ClassMetrics& m = report.per_class[c];
        m.precision_defined = pred_c > 0;
        m.recall_defined = true_c > 0;
        m.precision = pred_c > 0 ? static_cast<double>(tp) / static_cast<double>(pred_c) : 0.0;
        m.recall = true_c > 0 ? static_cast<double>(tp) / static_cast<double>(true_c) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return {cm, report};
}

// --- per-segment ground truth -----------------------------------------------------

// System-level truth per labeled segment; labels must agree across PMUs.
struct SegmentTable {
    std::vector<double> starts;
    std::vector<int> labels;
};

inline SegmentTable segment_table_from_labels(const std::vector<LabelRow>& rows) {
    std::map<double, int> by_start;
    for (const auto& r : rows) {
        auto it = by_start.find(r.segment_start_s);
        if (it == by_start.end())
            by_start[r.segment_start_s] = r.label;
        else if (it->second != r.label)
            throw DataError("segment labels disagree across PMUs at t=" +
                            std::to_string(r.segment_start_s));
    }
    SegmentTable table;
    for (const auto& [start, label] : by_start) {
        table.starts.push_back(start);
        table.labels.push_back(label);
    }
    if (table.starts.empty()) throw DataError("no labeled segments");
    return table;
}

// --- ablation over the 2x2 component grid -------------------------------------------

struct ScenarioResult {
    MetricsReport report;
    ConfusionMatrix confusion{6};
    std::vector<int> predictions;
};

struct AblationResult {
    std::array<ScenarioResult, 4> scenarios;  // 1..4 in spec order
    DetectionMatrix detection;
    ClassificationMatrix classification;
    std::vector<int> truths;
};

namespace detail {

inline std::size_t column_at(const std::vector<double>& column_starts, double start, double stride) {
    const double first = column_starts.front();
    const double idx = (start - first) / stride;
    const auto k = static_cast<std::ptrdiff_t>(std::llround(idx));
    if (k < 0 || static_cast<std::size_t>(k) >= column_starts.size() ||
        std::fabs(column_starts[static_cast<std::size_t>(k)] - start) > 1e-6)
        throw DataError("evaluation: no sliding column at t=" + std::to_string(start));
    return static_cast<std::size_t>(k);
}

}  // namespace detail

// Four evaluation scenarios on identical data:
//   1: classifier on one aligned window per segment (no sliding, no fusion)
//   2: per-window detection fused with classification (no sliding)
//   3: sliding window + identification of the classification matrix only
//   4: the full pipeline (sliding + identification + fusion)
// Scenarios 1-2 grade the single aligned window; 3-4 grade the segment's
// within-segment column span after identification. All four predict one
// label per labeled segment, so accuracies are directly comparable.
inline AblationResult run_ablation(const Dataset& data, const VaeGanModel& model,
                                   const DetectorFn& detector, const ClassifierFn& classifier,
                                   const SlidingWindowConfig& window_cfg,
                                   const IdentificationConfig& ident, unsigned n_threads = 0) {
    validate(ident);
    const SegmentTable table = segment_table_from_labels(data.labels);
    WindowGrid raw = segment_stream(data.streams, window_cfg, data.meta.v_rate);
    WindowGrid grid = normalize_grid(raw);
    auto errors = compute_error_grid(model, grid, n_threads);
    auto matrices = build_matrices(grid, errors, detector, classifier);
    const DetectionMatrix& det = matrices.first;
    const ClassificationMatrix& cls = matrices.second;

    const double seg_len = data.meta.segment_seconds;
    const double win_len = window_cfg.window_seconds;
    const double stride = window_cfg.stride_seconds;
    // Aligned single window: centered in the segment, snapped to the stride grid.
    const double aligned_offset = std::floor((seg_len - win_len) / 2.0 / stride) * stride;
    const std::size_t span_cols =
        static_cast<std::size_t>(std::floor((seg_len - win_len) / stride + 1e-9)) + 1;

    AblationResult out;
    out.truths = table.labels;
    std::array<std::vector<int>, 4> preds;
    std::array<std::vector<int>, 4> det_preds;  // binary detection per scenario (2 and 4)

    for (std::size_t s = 0; s < table.starts.size(); ++s) {
        const double s0 = table.starts[s];
        const std::size_t cal = detail::column_at(det.column_starts, s0 + aligned_offset, stride);
        const std::size_t c0 = detail::column_at(det.column_starts, s0, stride);

        // Scenario 1: classification only, one aligned window per PMU,
        // majority across PMUs.
        std::vector<int> single_cls_rows, single_det_rows;
        for (std::size_t p = 0; p < grid.n_pmus(); ++p) {
            single_cls_rows.push_back(cls.labels[p][cal]);
            single_det_rows.push_back(det.flags[p][cal]);
        }
        const int s1 = aggregate_rows(single_cls_rows);
        preds[0].push_back(s1);

        // Scenario 2: fuse the same single window's detection and classification.
        const int det_single = aggregate_rows(single_det_rows);
        preds[1].push_back(fuse(det_single, s1));
        det_preds[1].push_back(det_single);

        // Scenario 3: identification over the segment's column span,
        // classification pathway only.
        FinalDecision span = fuse_span(det, cls, c0, c0 + span_cols, ident);
        preds[2].push_back(span.classification_system);

        // Scenario 4: full pipeline decision on the same span.
        preds[3].push_back(span.final_label);
        det_preds[3].push_back(span.detection_system);
    }

    static const char* kScenarioTags[4] = {
        "scenario1 fusion=off sliding=off granularity=single-window",
        "scenario2 fusion=on sliding=off granularity=single-window",
        "scenario3 fusion=off sliding=on granularity=segment-span",
        "scenario4 fusion=on sliding=on granularity=segment-span",
    };
    for (std::size_t i = 0; i < 4; ++i) {
        auto [cm, report] = score(preds[i], table.labels, 6);
        report.scenario = kScenarioTags[i];
        if (!det_preds[i].empty()) {
            std::size_t correct = 0;
            for (std::size_t s = 0; s < det_preds[i].size(); ++s)
                if (det_preds[i][s] == (table.labels[s] != 0 ? 1 : 0)) ++correct;
            report.has_detection_accuracy = true;
            report.detection_accuracy =
                static_cast<double>(correct) / static_cast<double>(det_preds[i].size());
        }
        out.scenarios[i] = {std::move(report), std::move(cm), std::move(preds[i])};
    }
    out.detection = std::move(matrices.first);
    out.classification = std::move(matrices.second);
    return out;
}

// --- report output -------------------------------------------------------------------

inline void write_metrics_text(std::ostream& os, const MetricsReport& r) {
    os << "scenario: " << r.scenario << "\n";
    os << "accuracy: " << detail::format_double(r.accuracy) << "\n";
    if (r.has_detection_accuracy)
        os << "detection_accuracy: " << detail::format_double(r.detection_accuracy) << "\n";
    else
        os << "detection_accuracy: -\n";
    os << "class,precision,recall,f1\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const auto& m = r.per_class[c];
        os << c << ',' << detail::format_double(m.precision) << ','
           << detail::format_double(m.recall) << ',' << detail::format_double(m.f1);
        if (!m.precision_defined || !m.recall_defined) os << ",undefined-as-0";
        os << "\n";
    }
}

inline void write_metrics_csv(const std::string& path, const std::vector<MetricsReport>& reports) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open metrics csv for writing: " + path);
    os << "scenario,accuracy,detection_accuracy";
    const std::size_t k = reports.empty() ? 0 : reports[0].per_class.size();
    for (std::size_t c = 0; c < k; ++c)
        os << ",precision_" << c << ",recall_" << c << ",f1_" << c;
    os << "\n";
    for (const auto& r : reports) {
        os << '"' << r.scenario << '"' << ',' << detail::format_double(r.accuracy) << ','
           << (r.has_detection_accuracy ? detail::format_double(r.detection_accuracy) : std::string("-"));
        for (const auto& m : r.per_class)
            os << ',' << detail::format_double(m.precision) << ',' << detail::format_double(m.recall)
               << ',' << detail::format_double(m.f1);
        os << "\n";
    }
    if (!os) throw IoError("failed writing metrics csv: " + path);
}

inline void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open confusion csv for writing: " + path);
    os << "true\\pred";
    for (std::size_t c = 0; c < cm.k; ++c) os << ',' << c;
    os << "\n";
    for (std::size_t r = 0; r < cm.k; ++r) {
        os << r;
        for (std::size_t c = 0; c < cm.k; ++c) os << ',' << cm.at(r, c);
        os << "\n";
    }
    if (!os) throw IoError("failed writing confusion csv: " + path);
}

// Grayscale heat image of the confusion matrix (dark = large count).
inline void write_confusion_pgm(const std::string& path, const ConfusionMatrix& cm) {
    const int s = 16;
    long maxc = 1;
    for (long c : cm.counts) maxc = std::max(maxc, c);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open confusion pgm for writing: " + path);
    os << "P5\n" << cm.k * s << " " << cm.k * s << "\n255\n";
    for (std::size_t r = 0; r < cm.k; ++r)
        for (int py = 0; py < s; ++py)
            for (std::size_t c = 0; c < cm.k; ++c) {
                const double frac = static_cast<double>(cm.at(r, c)) / static_cast<double>(maxc);
                const char pix = static_cast<char>(255 - static_cast<int>(std::lround(220.0 * frac)));
                for (int px = 0; px < s; ++px) os.put(pix);
            }
    if (!os) throw IoError("failed writing confusion pgm: " + path);
}

}  // namespace pmuevent
