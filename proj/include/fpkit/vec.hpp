#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpkit {

using Vec = std::vector<double>;

inline void check_same_dim(const Vec& x, const Vec& y, const char* where) {
    if (x.size() != y.size())
        throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                    std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
}

inline bool has_nan(const Vec& x) {
    for (double v : x)
        if (std::isnan(v)) return true;
    return false;
}

// Compensated accumulator for long sums (1e4-1e5 terms).
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
    void reset() { sum = comp = 0.0; }
};

inline double dot(const Vec& x, const Vec& y) {
    check_same_dim(x, y, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2_sq(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double norm2(const Vec& x) { return std::sqrt(norm2_sq(x)); }

inline double norm1(const Vec& x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s;
}

inline double norm_inf(const Vec& x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::fabs(v));
    return s;
}

inline Vec sub(const Vec& x, const Vec& y) {
    check_same_dim(x, y, "sub");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] - y[i];
    return r;
}

inline Vec add(const Vec& x, const Vec& y) {
    check_same_dim(x, y, "add");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + y[i];
    return r;
}

inline Vec scaled(const Vec& x, double a) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i];
    return r;
}

// x += a*y
inline void axpy(Vec& x, double a, const Vec& y) {
    check_same_dim(x, y, "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * y[i];
}

inline double dist2(const Vec& x, const Vec& y) {
    check_same_dim(x, y, "dist2");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double dist_inf(const Vec& x, const Vec& y) {
    check_same_dim(x, y, "dist_inf");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s = std::max(s, std::fabs(x[i] - y[i]));
    return s;
}

/// Dense row-major matrix. Minimal: the toolkit only needs matvec-style ops
/// at desk scale.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec a;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    // y = M x
    Vec apply(const Vec& x) const {
        if (x.size() != cols) throw std::invalid_argument("DenseMatrix::apply: dimension mismatch");
        Vec y(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            const double* row = a.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    // y = x^T M  (row-vector convention)
    Vec apply_left(const Vec& x) const {
        if (x.size() != rows) throw std::invalid_argument("DenseMatrix::apply_left: dimension mismatch");
        Vec y(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double xi = x[i];
            if (xi == 0.0) continue;
            const double* row = a.data() + i * cols;
            for (std::size_t j = 0; j < cols; ++j) y[j] += xi * row[j];
        }
        return y;
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols, rows);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
        return t;
    }
};

// Solves M x = b in place via Gaussian elimination with partial pivoting.
inline Vec solve_dense(DenseMatrix m, Vec b) {
    if (m.rows != m.cols || b.size() != m.rows)
        throw std::invalid_argument("solve_dense: shape mismatch");
    const std::size_t n = m.rows;
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(m.at(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            double v = std::fabs(m.at(i, k));
            if (v > best) { best = v; piv = i; }
        }
        if (best == 0.0) throw std::domain_error("solve_dense: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = m.at(i, k) / m.at(k, k);
            if (f == 0.0) continue;
            m.at(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) m.at(i, j) -= f * m.at(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= m.at(i, j) * x[j];
        x[i] = s / m.at(i, i);
    }
    return x;
}

}  // namespace fpkit
