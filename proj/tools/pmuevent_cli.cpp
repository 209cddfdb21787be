// pmuevent: synchrophasor event detection and classification pipeline.
//
// Subcommands: generate, train-vaegan, train-classifier, tune, detect, run,
// ablate, evaluate. Every subcommand is reproducible: the same config and
// seed produce byte-identical outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pmuevent/classifier.hpp"
#include "pmuevent/csv_io.hpp"
#include "pmuevent/decision.hpp"
#include "pmuevent/envelope.hpp"
#include "pmuevent/eval.hpp"
#include "pmuevent/fusion.hpp"
#include "pmuevent/kvconfig.hpp"
#include "pmuevent/sliding.hpp"
#include "pmuevent/synthetic.hpp"
#include "pmuevent/vaegan.hpp"

namespace fs = std::filesystem;
using namespace pmuevent;

namespace {

const std::set<std::string> kKnownKeys = {
    // synthetic
    "synthetic.frame_rate", "synthetic.window_seconds", "synthetic.segment_seconds",
    "synthetic.n_pmus", "synthetic.count0", "synthetic.count1", "synthetic.count2",
    "synthetic.count3", "synthetic.count4", "synthetic.count5", "synthetic.seed",
    "synthetic.v_rate", "synthetic.i_base", "synthetic.f_base", "synthetic.noise_sigma",
    "synthetic.event_seconds", "synthetic.onset_jitter_s", "synthetic.pmu_amp_jitter",
    "synthetic.sag_depth_pu", "synthetic.freq_dev_hz", "synthetic.osc_v_amp_pu",
    "synthetic.osc_i_amp", "synthetic.osc_freq_hz", "synthetic.i_step",
    "synthetic.t5_event_seconds",
    "synthetic.t5_sag_base_pu", "synthetic.t5_osc_base_pu", "synthetic.t5_osc_freq_hz",
    "synthetic.t5_subphase_s", "synthetic.t5_growth_per_s", "synthetic.t5_cap_time_s",
    "synthetic.t5_cap_jump", "synthetic.t5_scale_lo",
    "synthetic.t5_scale_hi",
    // model
    "model.latent_dim", "model.encoder_hidden", "model.decoder_hidden",
    "model.discriminator_hidden",
    // training
    "train.learning_rate", "train.batch_size", "train.max_epochs", "train.patience",
    "train.val_fraction", "train.seed", "train.lambda1", "train.lambda2",
    // classifier
    "classifier.hidden", "classifier.learning_rate", "classifier.batch_size",
    "classifier.max_epochs", "classifier.seed", "classifier.use_latent",
    "classifier.feature_offsets_s",
    // sliding + identification
    "sliding.window_seconds", "sliding.stride_seconds", "identify.eta",
    // decision rules
    "threshold.lambda_recon", "threshold.lambda_d", "threshold.eta1", "hull.inflation",
    "envelope.window_seconds", "envelope.area_threshold",
    // tuning
    "tune.grid_points",
};

KvConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    KvConfig cfg = KvConfig::parse_file(path);
    cfg.require_known_keys(kKnownKeys);
    return cfg;
}

SyntheticConfig synthetic_from(const KvConfig& cfg, std::optional<std::uint64_t> seed_flag) {
    SyntheticConfig s;
    s.frame_rate = cfg.get_double("synthetic.frame_rate", s.frame_rate);
    s.window_seconds = cfg.get_double("synthetic.window_seconds", s.window_seconds);
    s.segment_seconds = cfg.get_double("synthetic.segment_seconds", s.segment_seconds);
    s.n_pmus = static_cast<int>(cfg.get_int("synthetic.n_pmus", s.n_pmus));
    for (int label = 0; label <= 5; ++label)
        s.counts[static_cast<std::size_t>(label)] = static_cast<int>(
            cfg.get_int("synthetic.count" + std::to_string(label), 0));
    s.seed = static_cast<std::uint64_t>(cfg.get_int("synthetic.seed", 42));
    if (seed_flag) s.seed = *seed_flag;
    s.v_rate = cfg.get_double("synthetic.v_rate", s.v_rate);
    s.i_base = cfg.get_double("synthetic.i_base", s.i_base);
    s.f_base = cfg.get_double("synthetic.f_base", s.f_base);
    s.noise_sigma = cfg.get_double("synthetic.noise_sigma", s.noise_sigma);
    s.event_seconds = cfg.get_double("synthetic.event_seconds", s.event_seconds);
    s.onset_jitter_s = cfg.get_double("synthetic.onset_jitter_s", s.onset_jitter_s);
    s.pmu_amp_jitter = cfg.get_double("synthetic.pmu_amp_jitter", s.pmu_amp_jitter);
    s.sag_depth_pu = cfg.get_double("synthetic.sag_depth_pu", s.sag_depth_pu);
    s.freq_dev_hz = cfg.get_double("synthetic.freq_dev_hz", s.freq_dev_hz);
    s.osc_v_amp_pu = cfg.get_double("synthetic.osc_v_amp_pu", s.osc_v_amp_pu);
    s.osc_i_amp = cfg.get_double("synthetic.osc_i_amp", s.osc_i_amp);
    s.osc_freq_hz = cfg.get_double("synthetic.osc_freq_hz", s.osc_freq_hz);
    s.i_step = cfg.get_double("synthetic.i_step", s.i_step);
    s.t5_event_seconds = cfg.get_double("synthetic.t5_event_seconds", s.t5_event_seconds);
    s.t5_sag_base_pu = cfg.get_double("synthetic.t5_sag_base_pu", s.t5_sag_base_pu);
    s.t5_osc_base_pu = cfg.get_double("synthetic.t5_osc_base_pu", s.t5_osc_base_pu);
    s.t5_osc_freq_hz = cfg.get_double("synthetic.t5_osc_freq_hz", s.t5_osc_freq_hz);
    s.t5_subphase_s = cfg.get_double("synthetic.t5_subphase_s", s.t5_subphase_s);
    s.t5_growth_per_s = cfg.get_double("synthetic.t5_growth_per_s", s.t5_growth_per_s);
    s.t5_cap_time_s = cfg.get_double("synthetic.t5_cap_time_s", s.t5_cap_time_s);
    s.t5_cap_jump = cfg.get_double("synthetic.t5_cap_jump", s.t5_cap_jump);
    s.t5_scale_lo = cfg.get_double("synthetic.t5_scale_lo", s.t5_scale_lo);
    s.t5_scale_hi = cfg.get_double("synthetic.t5_scale_hi", s.t5_scale_hi);
    return s;
}

SlidingWindowConfig sliding_from(const KvConfig& cfg, const DatasetMeta& meta, double window_flag,
                                 double stride_flag) {
    SlidingWindowConfig w;
    w.frame_rate = meta.frame_rate;
    w.window_seconds = cfg.get_double("sliding.window_seconds", meta.window_seconds);
    w.stride_seconds = cfg.get_double("sliding.stride_seconds", 1.0);
    if (window_flag > 0) w.window_seconds = window_flag;
    if (stride_flag > 0) w.stride_seconds = stride_flag;
    validate(w);
    return w;
}

VaeGanLayout layout_from(const KvConfig& cfg, std::size_t input_dim) {
    VaeGanLayout layout;
    layout.input_dim = input_dim;
    layout.latent_dim = static_cast<std::size_t>(cfg.get_int("model.latent_dim", 16));
    layout.encoder_hidden = cfg.get_size_list("model.encoder_hidden", {256, 64});
    layout.decoder_hidden = cfg.get_size_list("model.decoder_hidden", {64, 256});
    layout.discriminator_hidden = cfg.get_size_list("model.discriminator_hidden", {256, 64});
    return layout;
}

TrainConfig train_from(const KvConfig& cfg, std::optional<std::uint64_t> seed_flag) {
    TrainConfig t;
    t.learning_rate = cfg.get_double("train.learning_rate", 2e-4);
    t.batch_size = static_cast<std::size_t>(cfg.get_int("train.batch_size", 128));
    t.max_epochs = static_cast<std::size_t>(cfg.get_int("train.max_epochs", 100));
    t.patience = static_cast<std::size_t>(cfg.get_int("train.patience", 8));
    t.val_fraction = cfg.get_double("train.val_fraction", 0.15);
    t.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 1));
    if (seed_flag) t.seed = *seed_flag;
    t.weights.lambda1 = cfg.get_double("train.lambda1", 0.1);
    t.weights.lambda2 = cfg.get_double("train.lambda2", 0.05);
    return t;
}

struct SegmentGeometry {
    SegmentTable table;
    double aligned_offset = 0.0;  // window start inside a segment, snapped to stride
    std::size_t span_cols = 0;    // within-segment column count
};

SegmentGeometry segment_geometry(const Dataset& data, const SlidingWindowConfig& w) {
    SegmentGeometry g;
    g.table = segment_table_from_labels(data.labels);
    const double seg = data.meta.segment_seconds;
    g.aligned_offset = std::floor((seg - w.window_seconds) / 2.0 / w.stride_seconds) * w.stride_seconds;
    g.span_cols =
        static_cast<std::size_t>(std::floor((seg - w.window_seconds) / w.stride_seconds + 1e-9)) + 1;
    return g;
}

std::size_t column_index(const std::vector<double>& starts, double t, double stride) {
    const auto k = static_cast<std::ptrdiff_t>(std::llround((t - starts.front()) / stride));
    if (k < 0 || static_cast<std::size_t>(k) >= starts.size() ||
        std::fabs(starts[static_cast<std::size_t>(k)] - t) > 1e-6)
        throw DataError("no sliding-window column at t=" + std::to_string(t));
    return static_cast<std::size_t>(k);
}

// Detector closure per --rule.
DetectorFn make_detector(const std::string& rule, const std::string& rule_file,
                         const std::string& hull_file, const KvConfig& cfg, double frame_rate) {
    if (rule == "threshold") {
        ThresholdRule r;
        if (!rule_file.empty()) {
            r = load_threshold_rule(rule_file);
        } else {
            r.lambda_recon = cfg.get_double("threshold.lambda_recon", 1.0);
            r.lambda_d = cfg.get_double("threshold.lambda_d", 1.0);
            r.eta1 = cfg.get_double("threshold.eta1", 0.025);
            validate(r);
        }
        return [r](const PmuWindow&, const ErrorPair& e) { return detect_threshold(e, r); };
    }
    if (rule == "hull") {
        if (hull_file.empty()) throw ConfigError("--rule hull requires --hull-file");
        ConvexHullRegion region = load_hull_csv(hull_file);
        return [region](const PmuWindow&, const ErrorPair& e) { return detect_hull(e, region); };
    }
    if (rule == "envelope") {
        EnvelopeConfig e;
        if (!rule_file.empty()) {
            e = load_envelope_config(rule_file);
        } else {
            e.window_len = static_cast<std::size_t>(
                std::llround(cfg.get_double("envelope.window_seconds", 1.0) * frame_rate));
            e.area_threshold = cfg.get_double("envelope.area_threshold", 0.1);
            validate(e);
        }
        return [e, frame_rate](const PmuWindow& w, const ErrorPair&) {
            return detect_envelope(w, e, frame_rate);
        };
    }
    throw ConfigError("unknown rule '" + rule + "' (expected threshold|hull|envelope)");
}

ClassifierFn make_classifier_fn(const MlpClassifier& clf, const VaeGanModel& model) {
    return [&clf, &model](const PmuWindow& w, const ErrorPair& e) {
        return classify(clf, classifier_features(model, e, w.values.data, clf.use_latent));
    };
}

// Aligned per-segment windows (and offsets around them) from the sliding grid.
struct AlignedCells {
    std::vector<std::size_t> columns;  // column per segment
    WindowGrid grid;                   // normalized
    std::vector<std::vector<ErrorPair>> errors;
};

AlignedCells aligned_cells(const Dataset& data, const SlidingWindowConfig& w,
                           const SegmentGeometry& g, const VaeGanModel& model, unsigned threads) {
    AlignedCells cells;
    cells.grid = normalize_grid(segment_stream(data.streams, w, data.meta.v_rate));
    cells.errors = compute_error_grid(model, cells.grid, threads);
    for (double s0 : g.table.starts)
        cells.columns.push_back(
            column_index(cells.grid.column_starts, s0 + g.aligned_offset, w.stride_seconds));
    return cells;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
    KvConfig cfg = load_config(config_path);
    SyntheticConfig s = synthetic_from(cfg, seed);
    Dataset ds = generate_synthetic(s);
    write_dataset(ds, out_dir);
    std::cout << "generate: wrote " << ds.streams.size() << " pmu streams, "
              << ds.labels.size() << " label rows to " << out_dir << "\n";
    return 0;
}

int cmd_train_vaegan(const std::string& config_path, const std::string& data_dir,
                     const std::string& out_model, const std::string& out_hull,
                     const std::string& out_history, std::optional<std::uint64_t> seed,
                     unsigned threads) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    SlidingWindowConfig w = sliding_from(cfg, data.meta, 0, 0);
    WindowGrid grid = normalize_grid(segment_stream(data.streams, w, data.meta.v_rate));
    SegmentTable table = segment_table_from_labels(data.labels);

    // Training uses normal-operation windows only: any window overlapping a
    // nonzero-labeled segment is excluded.
    auto overlaps_event = [&](double start) {
        const double end = start + w.window_seconds;
        for (std::size_t s = 0; s < table.starts.size(); ++s) {
            if (table.labels[s] == 0) continue;
            const double s0 = table.starts[s], s1 = s0 + data.meta.segment_seconds;
            if (start < s1 && s0 < end) return true;
        }
        return false;
    };
    const std::size_t dim = static_cast<std::size_t>(
        std::llround(w.window_seconds * w.frame_rate)) * kNumChannels;
    std::vector<const PmuWindow*> selected;
    for (std::size_t k = 0; k < grid.n_columns(); ++k) {
        if (overlaps_event(grid.column_starts[k])) continue;
        for (std::size_t p = 0; p < grid.n_pmus(); ++p)
            if (grid.valid[p][k]) selected.push_back(&grid.windows[p][k]);
    }
    if (selected.empty()) throw DataError("train-vaegan: no normal windows in dataset");
    RealMatrix windows(selected.size(), dim);
    for (std::size_t i = 0; i < selected.size(); ++i)
        std::copy(selected[i]->values.data.begin(), selected[i]->values.data.end(),
                  windows.row_ptr(i));

    VaeGanLayout layout = layout_from(cfg, dim);
    TrainConfig tcfg = train_from(cfg, seed);
    Pcg32 init_rng(tcfg.seed);
    VaeGanModel model = make_vaegan(layout, init_rng);
    TrainHistory history = train(model, windows, tcfg);
    save_vaegan(model, out_model);

    if (!out_history.empty()) {
        std::ofstream os(out_history, std::ios::trunc);
        if (!os) throw IoError("cannot open history csv: " + out_history);
        os << "epoch,recon,kl,adv,disc,val_recon\n";
        for (std::size_t e = 0; e < history.epochs.size(); ++e) {
            const auto& st = history.epochs[e];
            os << e << ',' << detail::format_double(st.recon) << ','
               << detail::format_double(st.kl) << ',' << detail::format_double(st.adv) << ','
               << detail::format_double(st.disc) << ',' << detail::format_double(st.val_recon)
               << "\n";
        }
    }

    if (!out_hull.empty()) {
        // Hull over the training normal windows' error pairs (Eq. 11 region).
        std::vector<ErrorPair> pairs(selected.size());
        auto errors = compute_error_grid(model, grid, threads);
        std::size_t i = 0;
        for (std::size_t k = 0; k < grid.n_columns(); ++k) {
            if (overlaps_event(grid.column_starts[k])) continue;
            for (std::size_t p = 0; p < grid.n_pmus(); ++p)
                if (grid.valid[p][k]) pairs[i++] = errors[p][k];
        }
        pairs.resize(i);
        ConvexHullRegion hull = build_hull(pairs, cfg.get_double("hull.inflation", 1.0));
        save_hull_csv(hull, out_hull);
    }
    std::cout << "train-vaegan: " << history.epochs.size() << " epochs, best epoch "
              << history.best_epoch << ", val_recon "
              << detail::format_double(history.epochs[history.best_epoch].val_recon) << ", "
              << selected.size() << " training windows\n";
    return 0;
}

int cmd_train_classifier(const std::string& config_path, const std::string& data_dir,
                         const std::string& model_path, const std::string& out_path,
                         std::optional<std::uint64_t> seed, unsigned threads) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    VaeGanModel model = load_vaegan(model_path);
    SlidingWindowConfig w = sliding_from(cfg, data.meta, 0, 0);
    SegmentGeometry g = segment_geometry(data, w);
    AlignedCells cells = aligned_cells(data, w, g, model, threads);

    ClassifierConfig ccfg;
    ccfg.hidden = cfg.get_size_list("classifier.hidden", {32, 32});
    ccfg.learning_rate = cfg.get_double("classifier.learning_rate", 3e-3);
    ccfg.batch_size = static_cast<std::size_t>(cfg.get_int("classifier.batch_size", 64));
    ccfg.max_epochs = static_cast<std::size_t>(cfg.get_int("classifier.max_epochs", 300));
    ccfg.seed = static_cast<std::uint64_t>(cfg.get_int("classifier.seed", 11));
    if (seed) ccfg.seed = *seed;
    ccfg.use_latent_features = cfg.get_bool("classifier.use_latent", false);
    const std::vector<double> offsets =
        cfg.get_double_list("classifier.feature_offsets_s", {-1.0, 0.0, 1.0});

    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    for (std::size_t s = 0; s < g.table.starts.size(); ++s) {
        for (double off : offsets) {
            const double t = g.table.starts[s] + g.aligned_offset + off;
            std::size_t col;
            try {
                col = column_index(cells.grid.column_starts, t, w.stride_seconds);
            } catch (const DataError&) {
                continue;  // offset walked off the grid edge
            }
            for (std::size_t p = 0; p < cells.grid.n_pmus(); ++p) {
                if (!cells.grid.valid[p][col]) continue;
                feats.push_back(classifier_features(model, cells.errors[p][col],
                                                    cells.grid.windows[p][col].values.data,
                                                    ccfg.use_latent_features));
                labels.push_back(g.table.labels[s]);
            }
        }
    }
    MlpClassifier clf = train_classifier(feats, labels, ccfg);
    save_classifier(clf, out_path);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < feats.size(); ++i)
        if (classify(clf, feats[i]) == labels[i]) ++correct;
    std::cout << "train-classifier: " << feats.size() << " feature rows, training accuracy "
              << detail::format_double(static_cast<double>(correct) / static_cast<double>(feats.size()))
              << "\n";
    return 0;
}

int cmd_tune(const std::string& config_path, const std::string& data_dir,
             const std::string& model_path, const std::string& rule, const std::string& out_path,
             unsigned threads) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    VaeGanModel model = load_vaegan(model_path);
    SlidingWindowConfig w = sliding_from(cfg, data.meta, 0, 0);
    SegmentGeometry g = segment_geometry(data, w);
    AlignedCells cells = aligned_cells(data, w, g, model, threads);

    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t s = 0; s < g.table.starts.size(); ++s) {
        const std::size_t col = cells.columns[s];
        for (std::size_t p = 0; p < cells.grid.n_pmus(); ++p) {
            labels.push_back(g.table.labels[s] != 0 ? 1 : 0);
            if (rule == "threshold") {
                ThresholdRule weights{cfg.get_double("threshold.lambda_recon", 1.0),
                                      cfg.get_double("threshold.lambda_d", 1.0), 0.0};
                scores.push_back(threshold_score(cells.errors[p][col], weights));
            } else if (rule == "envelope") {
                EnvelopeConfig e;
                e.window_len = static_cast<std::size_t>(
                    std::llround(cfg.get_double("envelope.window_seconds", 1.0) * w.frame_rate));
                scores.push_back(envelope_score(cells.grid.windows[p][col], e, w.frame_rate));
            } else {
                throw ConfigError("tune: rule must be threshold or envelope (hull needs no tuning)");
            }
        }
    }
    const auto points = static_cast<std::size_t>(cfg.get_int("tune.grid_points", 200));
    TuneResult best = tune_scores(scores, labels, make_threshold_grid(scores, points));
    if (rule == "threshold") {
        ThresholdRule tuned{cfg.get_double("threshold.lambda_recon", 1.0),
                            cfg.get_double("threshold.lambda_d", 1.0), best.threshold};
        save_threshold_rule(tuned, out_path);
    } else {
        EnvelopeConfig e;
        e.window_len = static_cast<std::size_t>(
            std::llround(cfg.get_double("envelope.window_seconds", 1.0) * w.frame_rate));
        e.area_threshold = best.threshold;
        save_envelope_config(e, out_path);
    }
    std::cout << "tune: rule " << rule << " threshold " << detail::format_double(best.threshold)
              << " accuracy " << detail::format_double(best.accuracy) << "\n";
    return 0;
}

int cmd_detect(const std::string& config_path, const std::string& data_dir,
               const std::string& model_path, const std::string& rule, const std::string& rule_file,
               const std::string& hull_file, const std::string& out_path, unsigned threads) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    VaeGanModel model = load_vaegan(model_path);
    SlidingWindowConfig w = sliding_from(cfg, data.meta, 0, 0);
    SegmentGeometry g = segment_geometry(data, w);
    AlignedCells cells = aligned_cells(data, w, g, model, threads);
    DetectorFn detector = make_detector(rule, rule_file, hull_file, cfg, w.frame_rate);

    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw IoError("cannot open detect output: " + out_path);
    os << "pmu,segment_start_s,flag,truth\n";
    std::size_t correct = 0, total = 0;
    for (std::size_t s = 0; s < g.table.starts.size(); ++s) {
        const std::size_t col = cells.columns[s];
        const int truth = g.table.labels[s] != 0 ? 1 : 0;
        for (std::size_t p = 0; p < cells.grid.n_pmus(); ++p) {
            const int flag = detector(cells.grid.windows[p][col], cells.errors[p][col]);
            os << cells.grid.pmu_ids[p] << ',' << detail::format_double(g.table.starts[s]) << ','
               << flag << ',' << truth << "\n";
            correct += (flag == truth) ? 1 : 0;
            ++total;
        }
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(total);
    os << "# accuracy " << detail::format_double(acc) << "\n";
    std::cout << "detect: rule " << rule << " accuracy " << detail::format_double(acc) << " over "
              << total << " windows\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& data_dir,
            const std::string& model_path, const std::string& classifier_path,
            const std::string& rule, const std::string& rule_file, const std::string& hull_file,
            int eta_flag, double window_flag, double stride_flag, const std::string& out_dir,
            unsigned threads) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    VaeGanModel model = load_vaegan(model_path);
    MlpClassifier clf = load_classifier(classifier_path);

    PipelineComponents comp;
    comp.model = &model;
    comp.window = sliding_from(cfg, data.meta, window_flag, stride_flag);
    comp.detector = make_detector(rule, rule_file, hull_file, cfg, comp.window.frame_rate);
    comp.classifier = make_classifier_fn(clf, model);
    comp.ident.eta = eta_flag > 0 ? eta_flag : static_cast<int>(cfg.get_int("identify.eta", 2));
    comp.v_rate = data.meta.v_rate;
    comp.n_threads = threads;

    PipelineResult res = run_pipeline(data.streams, comp);

    fs::create_directories(out_dir);
    write_matrix_csv((fs::path(out_dir) / "detection.csv").string(), res.detection);
    write_matrix_csv((fs::path(out_dir) / "classification.csv").string(), res.classification);
    write_detection_pgm((fs::path(out_dir) / "detection.pgm").string(), res.detection);
    write_classification_ppm((fs::path(out_dir) / "classification.ppm").string(),
                             res.classification);
    // Report references sibling files by name so reruns into different
    // directories stay byte-identical.
    write_decision_report((fs::path(out_dir) / "report.txt").string(), res.decision,
                          "detection.csv", "classification.csv");
    std::cout << "run: final label " << res.decision.final_label << " (detection "
              << res.decision.detection_system << ", classification "
              << res.decision.classification_system << ")\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_dir,
               const std::string& model_path, const std::string& classifier_path,
               const std::string& rule, const std::string& rule_file, const std::string& hull_file,
               int eta_flag, double window_flag, double stride_flag, const std::string& out_dir,
               unsigned threads, int only_scenario) {
    KvConfig cfg = load_config(config_path);
    Dataset data = load_dataset(data_dir);
    VaeGanModel model = load_vaegan(model_path);
    MlpClassifier clf = load_classifier(classifier_path);
    SlidingWindowConfig w = sliding_from(cfg, data.meta, window_flag, stride_flag);
    IdentificationConfig ident{eta_flag > 0 ? eta_flag
                                            : static_cast<int>(cfg.get_int("identify.eta", 2))};
    DetectorFn detector = make_detector(rule, rule_file, hull_file, cfg, w.frame_rate);
    AblationResult res =
        run_ablation(data, model, detector, make_classifier_fn(clf, model), w, ident, threads);

    fs::create_directories(out_dir);
    std::vector<MetricsReport> reports;
    for (const auto& sc : res.scenarios) reports.push_back(sc.report);
    write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), reports);
    std::ofstream text((fs::path(out_dir) / "metrics.txt").string(), std::ios::trunc);
    for (std::size_t i = 0; i < res.scenarios.size(); ++i) {
        if (only_scenario > 0 && static_cast<std::size_t>(only_scenario) != i + 1) continue;
        write_metrics_text(text, res.scenarios[i].report);
        text << "\n";
        const std::string stem = "scenario" + std::to_string(i + 1);
        write_confusion_csv((fs::path(out_dir) / (stem + "_confusion.csv")).string(),
                            res.scenarios[i].confusion);
        write_confusion_pgm((fs::path(out_dir) / (stem + "_confusion.pgm")).string(),
                            res.scenarios[i].confusion);
        std::cout << stem << ": accuracy "
                  << detail::format_double(res.scenarios[i].report.accuracy);
        if (res.scenarios[i].report.has_detection_accuracy)
            std::cout << ", detection "
                      << detail::format_double(res.scenarios[i].report.detection_accuracy);
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synchrophasor event detection and classification pipeline"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_path, model_path, classifier_path;
    std::string rule = "threshold", rule_file, hull_file, history_path, hull_out;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    int eta = 0, scenario = 0;
    double window_s = 0.0, stride_s = 0.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key-value config file");
        cmd->add_option("--seed", seed, "seed override");
        cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    };

    auto* generate = app.add_subcommand("generate", "generate a labeled synthetic dataset");
    add_common(generate);
    generate->add_option("--out", out_path, "output dataset directory")->required();

    auto* train = app.add_subcommand("train-vaegan", "train the VAE-GAN on normal windows");
    add_common(train);
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out-model", model_path, "model checkpoint path")->required();
    train->add_option("--out-hull", hull_out, "normal-region hull csv");
    train->add_option("--out-history", history_path, "loss history csv");

    auto* trainc = app.add_subcommand("train-classifier", "train the event-type MLP");
    add_common(trainc);
    trainc->add_option("--data", data_dir, "labeled dataset directory")->required();
    trainc->add_option("--model", model_path, "vaegan checkpoint")->required();
    trainc->add_option("--out", out_path, "classifier checkpoint path")->required();

    auto* tune = app.add_subcommand("tune", "tune a detection threshold on labeled data");
    add_common(tune);
    tune->add_option("--data", data_dir, "validation dataset directory")->required();
    tune->add_option("--model", model_path, "vaegan checkpoint")->required();
    tune->add_option("--rule", rule, "threshold|envelope")->required();
    tune->add_option("--out", out_path, "tuned rule file")->required();

    auto* detect = app.add_subcommand("detect", "per-window detection over labeled segments");
    add_common(detect);
    detect->add_option("--data", data_dir, "dataset directory")->required();
    detect->add_option("--model", model_path, "vaegan checkpoint")->required();
    detect->add_option("--rule", rule, "threshold|hull|envelope");
    detect->add_option("--rule-file", rule_file, "tuned rule file");
    detect->add_option("--hull-file", hull_file, "hull csv");
    detect->add_option("--out", out_path, "detection csv")->required();

    auto* run = app.add_subcommand("run", "full pipeline over a dataset");
    add_common(run);
    run->add_option("--data", data_dir, "dataset directory")->required();
    run->add_option("--model", model_path, "vaegan checkpoint")->required();
    run->add_option("--classifier", classifier_path, "classifier checkpoint")->required();
    run->add_option("--rule", rule, "threshold|hull|envelope");
    run->add_option("--rule-file", rule_file, "tuned rule file");
    run->add_option("--hull-file", hull_file, "hull csv");
    run->add_option("--eta", eta, "identification run-length threshold");
    run->add_option("--window-s", window_s, "window seconds override");
    run->add_option("--stride-s", stride_s, "stride seconds override");
    run->add_option("--out", out_path, "output directory")->required();

    auto* ablate = app.add_subcommand("ablate", "four-scenario ablation on labeled data");
    add_common(ablate);
    ablate->add_option("--data", data_dir, "dataset directory")->required();
    ablate->add_option("--model", model_path, "vaegan checkpoint")->required();
    ablate->add_option("--classifier", classifier_path, "classifier checkpoint")->required();
    ablate->add_option("--rule", rule, "threshold|hull|envelope");
    ablate->add_option("--rule-file", rule_file, "tuned rule file");
    ablate->add_option("--hull-file", hull_file, "hull csv");
    ablate->add_option("--eta", eta, "identification run-length threshold");
    ablate->add_option("--window-s", window_s, "window seconds override");
    ablate->add_option("--stride-s", stride_s, "stride seconds override");
    ablate->add_option("--out", out_path, "output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "score one scenario on labeled data");
    add_common(evaluate);
    evaluate->add_option("--data", data_dir, "dataset directory")->required();
    evaluate->add_option("--model", model_path, "vaegan checkpoint")->required();
    evaluate->add_option("--classifier", classifier_path, "classifier checkpoint")->required();
    evaluate->add_option("--rule", rule, "threshold|hull|envelope");
    evaluate->add_option("--rule-file", rule_file, "tuned rule file");
    evaluate->add_option("--hull-file", hull_file, "hull csv");
    evaluate->add_option("--eta", eta, "identification run-length threshold");
    evaluate->add_option("--scenario", scenario, "scenario 1..4 (default 4)");
    evaluate->add_option("--window-s", window_s, "window seconds override");
    evaluate->add_option("--stride-s", stride_s, "stride seconds override");
    evaluate->add_option("--out", out_path, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    }

    try {
        if (generate->parsed()) return cmd_generate(config_path, out_path, seed);
        if (train->parsed())
            return cmd_train_vaegan(config_path, data_dir, model_path, hull_out, history_path, seed,
                                    threads);
        if (trainc->parsed())
            return cmd_train_classifier(config_path, data_dir, model_path, out_path, seed, threads);
        if (tune->parsed())
            return cmd_tune(config_path, data_dir, model_path, rule, out_path, threads);
        if (detect->parsed())
            return cmd_detect(config_path, data_dir, model_path, rule, rule_file, hull_file,
                              out_path, threads);
        if (run->parsed())
            return cmd_run(config_path, data_dir, model_path, classifier_path, rule, rule_file,
                           hull_file, eta, window_s, stride_s, out_path, threads);
        if (ablate->parsed())
            return cmd_ablate(config_path, data_dir, model_path, classifier_path, rule, rule_file,
                              hull_file, eta, window_s, stride_s, out_path, threads, 0);
        if (evaluate->parsed())
            return cmd_ablate(config_path, data_dir, model_path, classifier_path, rule, rule_file,
                              hull_file, eta, window_s, stride_s, out_path, threads,
                              scenario == 0 ? 4 : scenario);
    } catch (const ConfigError& e) {
        std::cerr << "pmuevent: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "pmuevent: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
