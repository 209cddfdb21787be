#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "pmuevent/csv_io.hpp"
#include "pmuevent/errors.hpp"
#include "pmuevent/vaegan.hpp"

namespace pmuevent {

// --- weighted threshold rule -------------------------------------------------

struct ThresholdRule {
    double lambda_recon = 1.0;
    double lambda_d = 1.0;
    double eta1 = 0.0;
};

inline void validate(const ThresholdRule& rule) {
    if (rule.lambda_recon < 0.0 || rule.lambda_d < 0.0)
        throw ConfigError("threshold rule: weights must be non-negative");
    if (rule.lambda_recon == 0.0 && rule.lambda_d == 0.0)
        throw ConfigError("threshold rule: at least one weight must be positive");
}

inline double threshold_score(const ErrorPair& e, const ThresholdRule& rule) {
    return rule.lambda_recon * e.e_recon + rule.lambda_d * e.e_d;
}

// Event iff the weighted error sum strictly exceeds eta1.
inline int detect_threshold(const ErrorPair& e, const ThresholdRule& rule) {
    return threshold_score(e, rule) > rule.eta1 ? 1 : 0;
}

// --- convex hull rule ----------------------------------------------------------

using Point2 = std::array<double, 2>;

inline double cross2(const Point2& o, const Point2& a, const Point2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Convex region estimated from normal-operation error pairs. Vertices are
// ordered counter-clockwise with no three consecutive collinear. Degenerate
// inputs (a single point or a collinear set) keep their extreme points and
// carry an explicit flag. `inflation` scales the vertices about their
// centroid at query time; 1.0 keeps the exact hull.
struct ConvexHullRegion {
    std::vector<Point2> vertices;
    bool degenerate = false;
    double inflation = 1.0;

    std::vector<Point2> inflated() const {
        if (inflation == 1.0 || vertices.size() < 2) return vertices;
        Point2 c{0.0, 0.0};
        for (const auto& v : vertices) {
            c[0] += v[0];
            c[1] += v[1];
        }
        c[0] /= static_cast<double>(vertices.size());
        c[1] /= static_cast<double>(vertices.size());
        std::vector<Point2> out(vertices.size());
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            out[i][0] = c[0] + inflation * (vertices[i][0] - c[0]);
            out[i][1] = c[1] + inflation * (vertices[i][1] - c[1]);
        }
        return out;
    }
};

// Andrew's monotone chain; strict cross-product test drops collinear and
// interior points from the vertex list.
inline ConvexHullRegion build_hull(const std::vector<ErrorPair>& normal_points, double inflation = 1.0) {
    if (normal_points.empty()) throw DataError("build_hull: need at least one point");
    if (inflation <= 0.0) throw ConfigError("build_hull: inflation must be positive");
    std::vector<Point2> pts(normal_points.size());
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {normal_points[i].e_recon, normal_points[i].e_d};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    ConvexHullRegion region;
    region.inflation = inflation;
    if (pts.size() < 3) {
        region.vertices = pts;
        region.degenerate = true;
        return region;
    }
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {  // lower chain
        while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {  // upper chain
        const auto& p = pts[i];
        while (k >= lower && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
        hull[k++] = p;
    }
    hull.resize(k - 1);
    if (hull.size() < 3) {
        // All points collinear: keep the sorted extremes.
        region.vertices = {pts.front(), pts.back()};
        region.degenerate = true;
        return region;
    }
    region.vertices = std::move(hull);
    return region;
}

namespace detail {

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = p[0] - a[0], wy = p[1] - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p[0] - (a[0] + t * vx), dy = p[1] - (a[1] + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

// 0 when the point lies inside or on the boundary of the (possibly inflated)
// hull, 1 otherwise. Boundary counts as inside so training points never flag
// themselves. Degenerate hulls accept only exact members (within 1e-12 of
// the point or segment).
inline int detect_hull(const ErrorPair& e, const ConvexHullRegion& region) {
    if (region.vertices.empty()) throw ConfigError("detect_hull: hull not built");
    const Point2 p{e.e_recon, e.e_d};
    const std::vector<Point2> verts = region.inflated();
    if (region.degenerate) {
        if (verts.size() == 1) {
            const double dx = p[0] - verts[0][0], dy = p[1] - verts[0][1];
            return std::sqrt(dx * dx + dy * dy) <= 1e-12 ? 0 : 1;
        }
        return detail::point_segment_distance(p, verts.front(), verts.back()) <= 1e-12 ? 0 : 1;
    }
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Point2& a = verts[i];
        const Point2& b = verts[(i + 1) % verts.size()];
        if (cross2(a, b, p) < 0.0) return 1;  // strictly outside this edge's half-plane
    }
    return 0;
}

// --- threshold tuning -------------------------------------------------------------

struct TuneResult {
    double threshold = 0.0;
    double accuracy = 0.0;
};

// Grid search maximizing binary accuracy of `score > threshold`; ties go to
// the smaller threshold (favoring recall).
inline TuneResult tune_scores(const std::vector<double>& scores, const std::vector<int>& labels,
                              const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("tune: empty threshold grid");
    if (scores.size() != labels.size() || scores.empty())
        throw DataError("tune: scores/labels size mismatch");
    bool has_pos = false, has_neg = false;
    for (int l : labels) (l != 0 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DataError("tune: validation set must contain both classes");
    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());
    TuneResult best{sorted_grid.front(), -1.0};
    for (double eta : sorted_grid) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const int pred = scores[i] > eta ? 1 : 0;
            if (pred == (labels[i] != 0 ? 1 : 0)) ++correct;
        }
        const double acc = static_cast<double>(correct) / static_cast<double>(scores.size());
        if (acc > best.accuracy) best = {eta, acc};
    }
    return best;
}

inline TuneResult tune_threshold(const std::vector<ErrorPair>& errors, const std::vector<int>& labels,
                                 const ThresholdRule& weights, const std::vector<double>& grid) {
    validate(weights);
    std::vector<double> scores(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) scores[i] = threshold_score(errors[i], weights);
    return tune_scores(scores, labels, grid);
}

// Evenly spaced grid over [0, hi], hi chosen from the observed score range.
inline std::vector<double> make_threshold_grid(const std::vector<double>& scores, std::size_t points) {
    if (scores.empty() || points < 2) throw ConfigError("make_threshold_grid: bad input");
    const double hi = *std::max_element(scores.begin(), scores.end()) * 1.05;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

// --- persistence ---------------------------------------------------------------------

inline void save_hull_csv(const ConvexHullRegion& region, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open hull file for writing: " + path);
    os << "# inflation=" << detail::format_double_exact(region.inflation)
       << " degenerate=" << (region.degenerate ? 1 : 0) << "\n";
    os << "e_recon,e_d\n";
    for (const auto& v : region.vertices)
        os << detail::format_double_exact(v[0]) << ',' << detail::format_double_exact(v[1]) << "\n";
    if (!os) throw IoError("failed writing hull file: " + path);
}

inline ConvexHullRegion load_hull_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open hull file: " + path);
    ConvexHullRegion region;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# inflation=", 0) != 0)
        throw DataError(path + ": missing hull header comment");
    {
        std::istringstream hs(line.substr(2));
        std::string tok;
        while (hs >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "inflation") region.inflation = std::stod(val);
            if (key == "degenerate") region.degenerate = val == "1";
        }
    }
    if (!std::getline(is, line) || line != "e_recon,e_d")
        throw DataError(path + ": missing hull column header");
    std::size_t lineno = 2;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = detail::split_csv_row(line);
        if (fields.size() != 2) throw DataError(path + ": bad hull row at line " + std::to_string(lineno));
        region.vertices.push_back({detail::parse_field(fields[0], lineno, "e_recon"),
                                   detail::parse_field(fields[1], lineno, "e_d")});
    }
    if (region.vertices.empty()) throw DataError(path + ": empty hull");
    return region;
}

inline void save_threshold_rule(const ThresholdRule& rule, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open rule file for writing: " + path);
    os << "lambda_recon = " << detail::format_double_exact(rule.lambda_recon) << "\n"
       << "lambda_d = " << detail::format_double_exact(rule.lambda_d) << "\n"
       << "eta1 = " << detail::format_double_exact(rule.eta1) << "\n";
}

inline ThresholdRule load_threshold_rule(const std::string& path) {
    KvConfig cfg = KvConfig::parse_file(path);
    cfg.require_known_keys({"lambda_recon", "lambda_d", "eta1"});
    ThresholdRule rule;
    rule.lambda_recon = cfg.get_double("lambda_recon", rule.lambda_recon);
    rule.lambda_d = cfg.get_double("lambda_d", rule.lambda_d);
    rule.eta1 = cfg.get_double("eta1", rule.eta1);
    validate(rule);
    return rule;
}

}  // namespace pmuevent
