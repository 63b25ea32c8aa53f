#pragma once

// Minimal dense row-major matrix and the handful of kernels the networks use.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <span>
#include <vector>

namespace vrpmtw::nn {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    double& operator()(int r, int c) noexcept { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const noexcept { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::span<double> row(int r) noexcept { return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
    std::span<const double> row(int r) const noexcept {
        return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
    }

    std::size_t size() const noexcept { return data.size(); }
    void zero() noexcept { std::fill(data.begin(), data.end(), 0.0); }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.rows);
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* ci = c.data.data() + static_cast<std::size_t>(i) * c.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = b.data.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

/// C += A^T * B
inline void matmul_at_b_acc(const Matrix& a, const Matrix& b, Matrix& c) {
    assert(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols);
    for (int k = 0; k < a.rows; ++k) {
        const double* ak = a.data.data() + static_cast<std::size_t>(k) * a.cols;
        const double* bk = b.data.data() + static_cast<std::size_t>(k) * b.cols;
        for (int i = 0; i < a.cols; ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = c.data.data() + static_cast<std::size_t>(i) * c.cols;
            for (int j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
        }
    }
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

/// C = A * B^T
inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
    assert(a.cols == b.cols);
    return matmul(a, transpose(b));
}

/// Adds the 1 x cols bias to every row.
inline void add_row_bias(Matrix& m, const Matrix& bias) {
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) m(i, j) += bias.data[static_cast<std::size_t>(j)];
}

/// bias_grad += column sums of g.
inline void col_sum_acc(const Matrix& g, Matrix& bias_grad) {
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) bias_grad.data[static_cast<std::size_t>(j)] += g(i, j);
}

inline void add_inplace(Matrix& a, const Matrix& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline Matrix relu(const Matrix& x) {
    Matrix y = x;
    for (double& v : y.data) v = std::max(v, 0.0);
    return y;
}

/// grad *= 1[pre > 0]
inline void relu_backward(const Matrix& pre, Matrix& grad) {
    for (std::size_t i = 0; i < grad.data.size(); ++i)
        if (!(pre.data[i] > 0.0)) grad.data[i] = 0.0;
}

/// Numerically stable softmax of a vector.
inline std::vector<double> softmax(std::span<const double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - mx);
    for (double& v : p) v /= sum;
    return p;
}

inline std::vector<double> log_softmax(std::span<const double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    const double lse = mx + std::log(sum);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - lse;
    return out;
}

inline bool all_finite(const Matrix& m) {
    return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace vrpmtw::nn
