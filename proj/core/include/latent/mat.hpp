#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace latent {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. Small models only, no BLAS.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::size_t size() const { return data.size(); }
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// y = M x
inline Vec matvec(const Mat& m, const Vec& x) {
    require(x.size() == m.cols, "matvec: vector length " + std::to_string(x.size()) +
                                    " does not match matrix cols " + std::to_string(m.cols));
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    return y;
}

/// y = M^T x
inline Vec matvec_t(const Mat& m, const Vec& x) {
    require(x.size() == m.rows, "matvec_t: vector length mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double* row = m.data.data() + r * m.cols;
        const double xr = x[r];
        for (std::size_t c = 0; c < m.cols; ++c) y[c] += row[c] * xr;
    }
    return y;
}

/// M += a b^T
inline void add_outer(Mat& m, const Vec& a, const Vec& b) {
    require(a.size() == m.rows && b.size() == m.cols, "add_outer: shape mismatch");
    for (std::size_t r = 0; r < m.rows; ++r) {
        double* row = m.data.data() + r * m.cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < m.cols; ++c) row[c] += ar * b[c];
    }
}

inline double dot(const Vec& a, const Vec& b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace latent
