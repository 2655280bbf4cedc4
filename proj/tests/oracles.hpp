#pragma once

// Test-side oracles, kept independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fpkit/rng.hpp"
#include "fpkit/vec.hpp"

namespace oracles {

using fpkit::Vec;

// plain dense matrix as vector-of-rows, independent of fpkit::DenseMatrix internals
using Mat = std::vector<Vec>;

inline Mat mat_zero(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

inline Vec matvec(const Mat& m, const Vec& x) {
    Vec y(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        long double s = 0.0L;
        for (std::size_t j = 0; j < x.size(); ++j) s += static_cast<long double>(m[i][j]) * x[j];
        y[i] = static_cast<double>(s);
    }
    return y;
}

inline Vec vecmat(const Vec& x, const Mat& m) {
    Vec y(m[0].size(), 0.0);
    for (std::size_t j = 0; j < y.size(); ++j) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < m.size(); ++i) s += static_cast<long double>(x[i]) * m[i][j];
        y[j] = static_cast<double>(s);
    }
    return y;
}

/// Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
    const std::size_t n = a.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        if (a[k][k] == 0.0) throw std::runtime_error("oracle solve: singular");
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    Vec x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

/// Random SPD matrix B^T B + shift I.
inline Mat random_spd(std::size_t d, fpkit::Rng& rng, double shift = 0.1) {
    Mat b = mat_zero(d, d);
    for (auto& row : b)
        for (auto& v : row) v = rng.normal();
    Mat s = mat_zero(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double acc = (i == j) ? shift : 0.0;
            for (std::size_t k = 0; k < d; ++k) acc += b[k][i] * b[k][j];
            s[i][j] = acc;
        }
    return s;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_lambda_max(const Mat& s, fpkit::Rng& rng, int iters = 20000) {
    Vec v(s.size());
    for (auto& x : v) x = rng.normal();
    double lam = 0.0;
    for (int k = 0; k < iters; ++k) {
        Vec w = matvec(s, v);
        lam = fpkit::norm2(w);
        if (lam == 0.0) return 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / lam;
    }
    return lam;
}

/// Exact weighted simplex projection by active-set enumeration (2^d - 1
/// candidate supports, each solved in closed form).
inline Vec active_set_simplex(const Vec& y, const Vec& weights) {
    const std::size_t d = y.size();
    if (d > 20) throw std::runtime_error("active_set_simplex: too large");
    double best_obj = std::numeric_limits<double>::infinity();
    Vec best;
    for (unsigned long mask = 1; mask < (1UL << d); ++mask) {
        double sy = 0.0, sinv = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            if (mask & (1UL << i)) {
                sy += y[i];
                sinv += 1.0 / weights[i];
            }
        double mu = (sy - 1.0) / sinv;
        Vec x(d, 0.0);
        bool feasible = true;
        for (std::size_t i = 0; i < d; ++i)
            if (mask & (1UL << i)) {
                x[i] = y[i] - mu / weights[i];
                if (x[i] < -1e-12) feasible = false;
            }
        if (!feasible) continue;
        double obj = 0.0;
        for (std::size_t i = 0; i < d; ++i) obj += weights[i] * (x[i] - y[i]) * (x[i] - y[i]);
        if (obj < best_obj) {
            best_obj = obj;
            best = x;
        }
    }
    return best;
}

/// Markov transition matrix of the two-cluster chain, built directly from
/// the construction rules (row by row).
inline Mat markov_dense(long n, double p) {
    Mat m = mat_zero(2 * n, 2 * n);
    for (int c = 0; c < 2; ++c) {
        long off = c * n, other = (1 - c) * n;
        for (long s = 0; s < n; ++s) {
            long i = off + s;
            for (long j = 0; j < n; ++j) m[i][other + j] += p / static_cast<double>(n);
            double w = 1.0 - p;
            if (s == 0 || s == n - 1) {
                m[i][i] += 0.5 * w;
                m[i][off + (s == 0 ? 1 : n - 2)] += 0.5 * w;
            } else {
                m[i][i] += w / 3.0;
                m[i][off + s - 1] += w / 3.0;
                m[i][off + s + 1] += w / 3.0;
            }
        }
    }
    return m;
}

/// Stationary distribution: solve pi (P - I) = 0, sum(pi) = 1.
inline Vec markov_stationary(long n, double p) {
    Mat pm = markov_dense(n, p);
    const std::size_t N = 2 * n;
    Mat a = mat_zero(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) a[i][j] = pm[j][i] - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < N; ++j) a[N - 1][j] = 1.0;
    Vec b(N, 0.0);
    b[N - 1] = 1.0;
    return solve(std::move(a), std::move(b));
}

/// Gram-Schmidt orthogonal matrix with det +1 (no eigenvalue 1 generically
/// for even d).
inline Mat random_rotation(std::size_t d, fpkit::Rng& rng) {
    Mat g = mat_zero(d, d);
    for (auto& row : g)
        for (auto& v : row) v = rng.normal();
    // orthonormalize columns
    for (std::size_t j = 0; j < d; ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t k = 0; k < j; ++k) {
                double pr = 0.0;
                for (std::size_t i = 0; i < d; ++i) pr += g[i][j] * g[i][k];
                for (std::size_t i = 0; i < d; ++i) g[i][j] -= pr * g[i][k];
            }
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) nrm += g[i][j] * g[i][j];
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < d; ++i) g[i][j] /= nrm;
    }
    // det sign by elimination
    Mat lu = g;
    double det = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < d; ++i)
            if (std::fabs(lu[i][k]) > std::fabs(lu[piv][k])) piv = i;
        if (piv != k) {
            std::swap(lu[k], lu[piv]);
            det = -det;
        }
        det *= lu[k][k];
        for (std::size_t i = k + 1; i < d; ++i) {
            double f = lu[i][k] / lu[k][k];
            for (std::size_t j = k; j < d; ++j) lu[i][j] -= f * lu[k][j];
        }
    }
    if (det < 0.0)
        for (std::size_t i = 0; i < d; ++i) g[i][0] = -g[i][0];
    return g;
}

/// Long-double summation for regret cross-checks.
inline double regret_longdouble(const std::vector<Vec>& payoffs, const std::vector<Vec>& actions,
                                const Vec& x) {
    long double total = 0.0L;
    for (std::size_t t = 0; t < payoffs.size(); ++t) {
        long double dp = 0.0L;
        for (std::size_t i = 0; i < x.size(); ++i)
            dp += static_cast<long double>(payoffs[t][i]) * (x[i] - actions[t][i]);
        total += dp;
    }
    return static_cast<double>(total);
}

inline Vec simplex_point(std::size_t d, fpkit::Rng& rng) {
    Vec x(d);
    double s = 0.0;
    for (auto& v : x) {
        v = -std::log(1.0 - rng.uniform01() + 1e-300);
        s += v;
    }
    for (auto& v : x) v /= s;
    return x;
}

}  // namespace oracles
