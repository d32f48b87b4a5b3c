#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace icq {

// Small dense row-major matrix. The systems solved here are pair-level
// transition matrices (a few hundred rows at most), so a plain Gaussian
// elimination with partial pivoting is all that is needed.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

/// Matrix infinity norm (max absolute row sum). Empty matrices have norm 0.
inline double inf_norm(const Matrix& m) {
    double best = 0.0;
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += std::abs(m.at(r, c));
        if (s > best) best = s;
    }
    return best;
}

inline std::vector<double> mat_vec(const Matrix& m, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("mat_vec: dimension mismatch");
    std::vector<double> y(m.rows, 0.0);
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < m.cols; ++c) s += m.at(r, c) * x[c];
        y[r] = s;
    }
    return y;
}

/// Solve A x = b by Gaussian elimination with partial pivoting. A is copied.
inline std::vector<double> solve_dense(Matrix a, std::vector<double> b) {
    if (a.rows != a.cols) throw std::invalid_argument("solve_dense: matrix must be square");
    if (static_cast<int>(b.size()) != a.rows) throw std::invalid_argument("solve_dense: rhs size mismatch");
    const int n = a.rows;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        double best = std::abs(a.at(k, k));
        for (int r = k + 1; r < n; ++r) {
            double v = std::abs(a.at(r, k));
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("solve_dense: singular system");
        if (pivot != k) {
            for (int c = 0; c < n; ++c) std::swap(a.at(k, c), a.at(pivot, c));
            std::swap(b[k], b[pivot]);
        }
        for (int r = k + 1; r < n; ++r) {
            double f = a.at(r, k) / a.at(k, k);
            if (f == 0.0) continue;
            for (int c = k; c < n; ++c) a.at(r, c) -= f * a.at(k, c);
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= a.at(r, c) * x[c];
        x[r] = s / a.at(r, r);
    }
    return x;
}

inline double sup_norm(const std::vector<double>& v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

}  // namespace icq
