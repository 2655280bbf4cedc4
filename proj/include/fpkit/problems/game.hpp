#pragma once

#include <cmath>
#include <stdexcept>

#include "fpkit/domain.hpp"
#include "fpkit/operator.hpp"
#include "fpkit/rng.hpp"

namespace fpkit::game {

/// Payoff matrix A = U V^T with standard-normal factors, rank <= r. The
/// factor distribution is a sampler choice, recorded in run manifests.
inline DenseMatrix sample_payoff(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed) {
    if (r == 0 || r > std::min(m, n)) throw std::invalid_argument("sample_payoff: invalid rank");
    Rng rng(seed);
    DenseMatrix u(m, r), v(n, r);
    for (auto& x : u.a) x = rng.normal();
    for (auto& x : v.a) x = rng.normal();
    DenseMatrix a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < r; ++k) s += u.at(i, k) * v.at(j, k);
            a.at(i, j) = s;
        }
    return a;
}

namespace detail {
inline void check_simplex_pair(const DenseMatrix& a, Vec& x, Vec& y) {
    if (x.size() != a.rows || y.size() != a.cols)
        throw std::invalid_argument("duality_gap: dimension mismatch");
    auto fix = [](Vec& v) {
        double sum = 0.0;
        for (double t : v) {
            if (t < -1e-8) throw std::invalid_argument("duality_gap: point is not on the simplex");
            sum += t;
        }
        if (std::fabs(sum - 1.0) > 1e-8)
            throw std::invalid_argument("duality_gap: point is not on the simplex");
        for (double& t : v) t = std::max(0.0, t) / sum;
    };
    fix(x);
    fix(y);
}
}  // namespace detail

/// delta(a,b) = max_i (A b)_i - min_j (A^T a)_j; zero exactly at saddle
/// points. Inputs are renormalized within a 1e-8 tolerance.
inline double duality_gap(const DenseMatrix& a, Vec row_strategy, Vec col_strategy) {
    detail::check_simplex_pair(a, row_strategy, col_strategy);
    Vec ab = a.apply(col_strategy);
    Vec ata = a.apply_left(row_strategy);
    double best_row = ab[0], best_col = ata[0];
    for (double v : ab) best_row = std::max(best_row, v);
    for (double v : ata) best_col = std::min(best_col, v);
    return best_row - best_col;
}

/// G(a,b) = s * (A b, -A^T a), the saddle-point field with orientation s.
inline Vec saddle_field(const DenseMatrix& a, const Vec& z, int sign) {
    const std::size_t m = a.rows, n = a.cols;
    Vec za(z.begin(), z.begin() + m);
    Vec zb(z.begin() + m, z.end());
    Vec ab = a.apply(zb);
    Vec ata = a.apply_left(za);
    Vec g(m + n);
    for (std::size_t i = 0; i < m; ++i) g[i] = sign * ab[i];
    for (std::size_t j = 0; j < n; ++j) g[m + j] = -sign * ata[j];
    return g;
}

/// Mirror-Prox operator on the product simplex:
///   F = 2 P o (I - gamma G o P o (I - gamma G)) - I.
/// KM(1/2) on it is exactly the Euclidean extragradient step. One
/// evaluation costs two G evaluations and two product-simplex projections.
inline Operator build_mirror_prox(DenseMatrix a, double gamma, int sign) {
    if (!(gamma > 0.0)) throw std::invalid_argument("build_mirror_prox: gamma must be positive");
    if (sign != 1 && sign != -1) throw std::invalid_argument("build_mirror_prox: sign must be +-1");
    const std::size_t m = a.rows, n = a.cols;
    Domain dom = Domain::product({Domain::simplex(m), Domain::simplex(n)});
    auto mat = std::make_shared<DenseMatrix>(std::move(a));
    auto eval = [mat, gamma, sign, dom](const Vec& z) {
        Vec g1 = saddle_field(*mat, z, sign);
        Vec w = z;
        axpy(w, -gamma, g1);
        w = project(dom, w);
        Vec g2 = saddle_field(*mat, w, sign);
        Vec v = z;
        axpy(v, -gamma, g2);
        v = project(dom, v);
        Vec out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = 2.0 * v[i] - z[i];
        return out;
    };
    return make_operator(dom, eval, "mirror_prox");
}

inline Vec uniform_strategies(std::size_t m, std::size_t n) {
    Vec z(m + n);
    for (std::size_t i = 0; i < m; ++i) z[i] = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < n; ++j) z[m + j] = 1.0 / static_cast<double>(n);
    return z;
}

/// The displayed operator has an orientation ambiguity relative to the
/// classic extragradient update. A 200-iteration probe on the 2x2
/// matching-pennies game picks the sign whose iterates reduce the duality
/// gap; fixed points are identical for both signs.
inline int select_orientation() {
    static const int chosen = [] {
        DenseMatrix pennies(2, 2);
        pennies.at(0, 0) = 1.0;
        pennies.at(0, 1) = -1.0;
        pennies.at(1, 0) = -1.0;
        pennies.at(1, 1) = 1.0;
        double best_gap[2] = {0.0, 0.0};
        int signs[2] = {+1, -1};
        for (int k = 0; k < 2; ++k) {
            Operator f = build_mirror_prox(pennies, 0.1, signs[k]);
            Vec z = {0.9, 0.1, 0.2, 0.8};
            for (int t = 0; t < 200; ++t) {
                Vec fz = f(z);
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.5 * (z[i] + fz[i]);
            }
            best_gap[k] = duality_gap(pennies, Vec(z.begin(), z.begin() + 2),
                                      Vec(z.begin() + 2, z.end()));
        }
        return best_gap[0] <= best_gap[1] ? signs[0] : signs[1];
    }();
    return chosen;
}

}  // namespace fpkit::game
