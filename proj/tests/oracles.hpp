#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

using Point2 = std::array<double, 2>;

inline double signed_area(const std::vector<Point2>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * a;
}

// Half-plane membership: a point is inside a convex polygon iff it lies on
// the inner side of every edge, where the inner side's sign comes from the
// polygon orientation.
inline bool half_plane_inside(const Point2& p, const std::vector<Point2>& poly) {
    const double orient = signed_area(poly) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        if (orient * cross < 0.0) return false;
    }
    return true;
}

// Gift-wrapping convex hull (counter-clockwise), used as the construction
// oracle; this is a different algorithm from the library's monotone chain.
inline std::vector<Point2> jarvis_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Point2> hull;
    std::size_t start = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i] < pts[start]) start = i;
    std::size_t current = start;
    do {
        hull.push_back(pts[current]);
        std::size_t next = (current + 1) % pts.size();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == current) continue;
            const double c = cross(pts[current], pts[next], pts[i]);
            if (c < 0.0) {
                next = i;
            } else if (c == 0.0) {
                // collinear: take the farther point so edge-interior points
                // never become vertices
                const double dn = std::hypot(pts[next][0] - pts[current][0],
                                             pts[next][1] - pts[current][1]);
                const double di = std::hypot(pts[i][0] - pts[current][0],
                                             pts[i][1] - pts[current][1]);
                if (di > dn) next = i;
            }
        }
        current = next;
    } while (current != start && hull.size() <= pts.size());
    return hull;
}

// Brute-force run identification: enumerate every constant nonzero run,
// apply the strict `length > eta` rule, longest run wins, earliest start
// breaks ties.
inline int enumerate_runs_identify(const std::vector<int>& row, int eta) {
    int best_label = 0;
    std::size_t best_len = 0;
    // i ascends, so the first run reaching a given length is the earliest;
    // strict > keeps it on ties.
    for (std::size_t i = 0; i < row.size(); ++i) {
        for (std::size_t j = i; j < row.size(); ++j) {
            bool constant = true;
            for (std::size_t t = i; t <= j; ++t)
                if (row[t] != row[i]) {
                    constant = false;
                    break;
                }
            if (!constant || row[i] == 0) continue;
            const std::size_t len = j - i + 1;
            if (len > best_len) {
                best_len = len;
                best_label = row[i];
            }
        }
    }
    return best_len > static_cast<std::size_t>(eta) ? best_label : 0;
}

}  // namespace oracles
