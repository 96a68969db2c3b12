#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vuldet::nn {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense row-major double matrix.  Vectors are n x 1.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols)
        : rows_(rows), cols_(cols),
          data_(static_cast<size_t>(rows) * cols, 0.0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[idx(r, c)]; }
    double operator()(int r, int c) const { return data_[idx(r, c)]; }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool same_shape(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }

private:
    size_t idx(int r, int c) const {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return static_cast<size_t>(r) * cols_ + c;
    }
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

inline void require_shape(const Matrix& m, int rows, int cols,
                          const char* what) {
    if (m.rows() != rows || m.cols() != cols)
        throw ShapeMismatch(std::string(what) + ": expected " +
                            std::to_string(rows) + "x" +
                            std::to_string(cols) + ", got " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()));
}

// y += W x   (W: m x n, x: n, y: m)
inline void matvec_add(const Matrix& W, const double* x, double* y) {
    const double* w = W.data();
    for (int r = 0; r < W.rows(); ++r) {
        double acc = 0.0;
        for (int c = 0; c < W.cols(); ++c) acc += w[c] * x[c];
        y[r] += acc;
        w += W.cols();
    }
}

// x += W^T d   (W: m x n, d: m, x: n)
inline void matvec_t_add(const Matrix& W, const double* d, double* x) {
    const double* w = W.data();
    for (int r = 0; r < W.rows(); ++r) {
        const double dr = d[r];
        for (int c = 0; c < W.cols(); ++c) x[c] += w[c] * dr;
        w += W.cols();
    }
}

// W += a b^T   (a: m, b: n, W: m x n)
inline void outer_add(const double* a, const double* b, Matrix& W) {
    double* w = W.data();
    for (int r = 0; r < W.rows(); ++r) {
        const double ar = a[r];
        for (int c = 0; c < W.cols(); ++c) w[c] += ar * b[c];
        w += W.cols();
    }
}

}  // namespace vuldet::nn
