#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pmuevent/errors.hpp"

namespace pmuevent {

// Dense row-major matrix of doubles. Rows are samples almost everywhere in
// this library (batch x features).
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row_ptr(std::size_t r) { return data.data() + r * cols; }
    const double* row_ptr(std::size_t r) const { return data.data() + r * cols; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline void require_shape(const RealMatrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows != rows || m.cols != cols)
        throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                             std::to_string(m.cols));
}

// C += A * B^T where A is n x k and B is m x k. The transposed right-hand
// side keeps both inner loops contiguous for row-major storage.
inline void add_matmul_bt(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows)
        throw DimensionError("add_matmul_bt: incompatible shapes");
    const std::size_t n = a.rows, m = b.rows, k = a.cols;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double* bj = b.row_ptr(j);
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] += acc;
        }
    }
}

// C += A * B where A is n x k and B is k x m.
inline void add_matmul(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw DimensionError("add_matmul: incompatible shapes");
    const std::size_t n = a.rows, m = b.cols, k = a.cols;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a.row_ptr(i);
        double* ci = c.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b.row_ptr(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
        }
    }
}

// C += A^T * B where A is k x n and B is k x m (used for weight gradients).
inline void add_matmul_at(const RealMatrix& a, const RealMatrix& b, RealMatrix& c) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw DimensionError("add_matmul_at: incompatible shapes");
    const std::size_t k = a.rows, n = a.cols, m = b.cols;
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a.row_ptr(p);
        const double* bp = b.row_ptr(p);
        for (std::size_t i = 0; i < n; ++i) {
            const double av = ap[i];
            if (av == 0.0) continue;
            double* ci = c.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) ci[j] += av * bp[j];
        }
    }
}

}  // namespace pmuevent
