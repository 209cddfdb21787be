#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"
#include "pmuevent/sliding.hpp"

namespace pmuevent {

struct IdentificationConfig {
    int eta = 2;  // a run must be strictly longer than eta to count
};

inline void validate(const IdentificationConfig& cfg) {
    if (cfg.eta < 1) throw ConfigError("identification: eta must be >= 1");
}

// Row-wise identification: finds the longest run of identical nonzero labels
// and returns that label when the run length strictly exceeds eta, else 0.
// Among equal-length maximal runs of different labels the earliest run wins.
inline int identify_row(const std::vector<int>& row, int eta) {
    if (row.empty()) throw DataError("identify_row: empty row");
    if (eta < 1) throw ConfigError("identify_row: eta must be >= 1");
    int best_label = 0;
    std::size_t best_len = 0;
    std::size_t i = 0;
    while (i < row.size()) {
        const int label = row[i];
        std::size_t j = i;
        while (j < row.size() && row[j] == label) ++j;
        if (label != 0 && (j - i) > best_len) {  // strict: earliest maximal run wins
            best_len = j - i;
            best_label = label;
        }
        i = j;
    }
    return best_len > static_cast<std::size_t>(eta) ? best_label : 0;
}

// Cross-PMU aggregation: the most frequent nonzero row label; frequency ties
// break toward the lowest label; all-zero input stays 0.
inline int aggregate_rows(const std::vector<int>& row_labels) {
    if (row_labels.empty()) throw DataError("aggregate_rows: no rows");
    int counts[6] = {0, 0, 0, 0, 0, 0};
    for (int l : row_labels) {
        if (l < 0 || l > 5) throw ContractError("aggregate_rows: label outside 0..5");
        ++counts[l];
    }
    int best = 0, best_count = 0;
    for (int l = 1; l <= 5; ++l)
        if (counts[l] > best_count) {  // strict: ties keep the lowest label
            best_count = counts[l];
            best = l;
        }
    return best;
}

// Decision fusion of the system-level detection bit and classification
// label:
//   (0, 0) -> 0      no event
//   (1, 0) -> 5      detected but no known class: unknown event type
//   (_, c) -> c      a known class wins whenever classification assigns one
inline int fuse(int detection, int classification) {
    if (detection != 0 && detection != 1)
        throw ContractError("fuse: detection must be 0 or 1, got " + std::to_string(detection));
    if (classification < 0 || classification > 4)
        throw ContractError("fuse: classification must be in 0..4, got " +
                            std::to_string(classification));
    if (classification != 0) return classification;
    return detection == 1 ? 5 : 0;
}

// System-level event decision with full provenance.
struct FinalDecision {
    int final_label = 0;
    int detection_system = 0;       // aggregated detection bit
    int classification_system = 0;  // aggregated classification label
    std::vector<int> detection_rows;
    std::vector<int> classification_rows;
    int eta = 0;
};

// Identification + fusion over a half-open column range of the two matrices.
// The whole-matrix case is run_pipeline's final decision; evaluation uses
// per-segment ranges.
inline FinalDecision fuse_span(const DetectionMatrix& det, const ClassificationMatrix& cls,
                               std::size_t col_begin, std::size_t col_end,
                               const IdentificationConfig& ident) {
    validate(ident);
    if (det.flags.size() != cls.labels.size())
        throw DimensionError("fuse_span: matrices have different row counts");
    if (col_end <= col_begin || col_end > det.column_starts.size())
        throw DimensionError("fuse_span: bad column range");
    FinalDecision out;
    out.eta = ident.eta;
    for (std::size_t p = 0; p < det.flags.size(); ++p) {
        std::vector<int> det_row(det.flags[p].begin() + static_cast<std::ptrdiff_t>(col_begin),
                                 det.flags[p].begin() + static_cast<std::ptrdiff_t>(col_end));
        std::vector<int> cls_row(cls.labels[p].begin() + static_cast<std::ptrdiff_t>(col_begin),
                                 cls.labels[p].begin() + static_cast<std::ptrdiff_t>(col_end));
        out.detection_rows.push_back(identify_row(det_row, ident.eta));
        out.classification_rows.push_back(identify_row(cls_row, ident.eta));
    }
    out.detection_system = aggregate_rows(out.detection_rows);
    out.classification_system = aggregate_rows(out.classification_rows);
    out.final_label = fuse(out.detection_system, out.classification_system);
    return out;
}

// --- end-to-end pipeline -------------------------------------------------------

struct PipelineComponents {
    const VaeGanModel* model = nullptr;
    DetectorFn detector;
    ClassifierFn classifier;
    SlidingWindowConfig window;
    IdentificationConfig ident;
    double v_rate = 1.0;
    unsigned n_threads = 0;
};

struct PipelineResult {
    FinalDecision decision;
    DetectionMatrix detection;
    ClassificationMatrix classification;
    std::vector<std::vector<ErrorPair>> errors;
    WindowGrid normalized;  // kept for evaluation reuse
};

// segment -> errors -> matrices -> identification -> fusion, over the whole
// analysis window. Every intermediate is retained in the result.
inline PipelineResult run_pipeline(const std::vector<PmuStream>& streams,
                                   const PipelineComponents& comp) {
    if (!comp.model) throw ConfigError("run_pipeline: model required");
    if (!comp.detector || !comp.classifier)
        throw ConfigError("run_pipeline: detector and classifier required");
    PipelineResult res;
    WindowGrid raw = segment_stream(streams, comp.window, comp.v_rate);
    res.normalized = normalize_grid(raw);
    res.errors = compute_error_grid(*comp.model, res.normalized, comp.n_threads);
    auto matrices = build_matrices(res.normalized, res.errors, comp.detector, comp.classifier);
    res.detection = std::move(matrices.first);
    res.classification = std::move(matrices.second);
    res.decision = fuse_span(res.detection, res.classification, 0, res.detection.column_starts.size(),
                             comp.ident);
    return res;
}

// Structured text record of one decision.
inline void write_decision_report(const std::string& path, const FinalDecision& d,
                                  const std::string& detection_csv,
                                  const std::string& classification_csv) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open report for writing: " + path);
    os << "final_label " << d.final_label << "\n";
    os << "detection_system " << d.detection_system << "\n";
    os << "classification_system " << d.classification_system << "\n";
    os << "eta " << d.eta << "\n";
    os << "detection_rows";
    for (int v : d.detection_rows) os << ' ' << v;
    os << "\nclassification_rows";
    for (int v : d.classification_rows) os << ' ' << v;
    os << "\ndetection_matrix " << detection_csv << "\n";
    os << "classification_matrix " << classification_csv << "\n";
    if (!os) throw IoError("failed writing report: " + path);
}

}  // namespace pmuevent
