#pragma once

#include <stdexcept>

#include "fpkit/operator.hpp"

namespace fpkit::markov {

/// Two near-disconnected clusters of n states each. Within a cluster the
/// walk is a lazy path walk: interior states stay/step left/step right with
/// conditional weight 1/3 each, the two boundary states split 1/2 stay,
/// 1/2 to their unique neighbor. With probability p the chain jumps to the
/// other cluster, uniformly over its n states.
struct ChainSpec {
    long n = 2;        // cluster size; 2n states
    double p = 1e-8;   // cluster jump probability
};

inline void validate(const ChainSpec& spec) {
    if (spec.n < 2) throw std::invalid_argument("markov: cluster size must be >= 2");
    if (!(spec.p > 0.0) || !(spec.p < 1.0))
        throw std::invalid_argument("markov: jump probability must lie in (0,1)");
}

/// Row-stochastic transition matrix, dense. Oracle/test scale only.
inline DenseMatrix dense_transition(const ChainSpec& spec) {
    validate(spec);
    const long n = spec.n;
    const double p = spec.p;
    DenseMatrix m(2 * n, 2 * n);
    for (int c = 0; c < 2; ++c) {
        long off = c * n;
        long other = (1 - c) * n;
        for (long s = 0; s < n; ++s) {
            long i = off + s;
            for (long j = 0; j < n; ++j) m.at(i, other + j) += p / static_cast<double>(n);
            double w = 1.0 - p;
            bool boundary = (s == 0 || s == n - 1);
            if (boundary) {
                long nb = (s == 0) ? 1 : n - 2;
                m.at(i, i) += 0.5 * w;
                m.at(i, off + nb) += 0.5 * w;
            } else {
                m.at(i, i) += w / 3.0;
                m.at(i, off + s - 1) += w / 3.0;
                m.at(i, off + s + 1) += w / 3.0;
            }
        }
    }
    return m;
}

/// F(pi) = pi P on the simplex over 2n states, evaluated in O(n) using the
/// band-plus-uniform-jump structure. Power iteration is plain iteration of
/// this operator.
inline Operator build(const ChainSpec& spec) {
    validate(spec);
    const long n = spec.n;
    const double p = spec.p;
    // conditional move weights of state s within its cluster
    auto stay = [n](long s) { return (s == 0 || s == n - 1) ? 0.5 : 1.0 / 3.0; };
    auto right = [n](long s) { return s == n - 1 ? 0.0 : (s == 0 ? 0.5 : 1.0 / 3.0); };
    auto left = [n](long s) { return s == 0 ? 0.0 : (s == n - 1 ? 0.5 : 1.0 / 3.0); };
    auto eval = [n, p, stay, right, left](const Vec& pi) {
        Vec out(2 * n, 0.0);
        double mass[2] = {0.0, 0.0};
        for (long s = 0; s < n; ++s) mass[0] += pi[s];
        for (long s = 0; s < n; ++s) mass[1] += pi[n + s];
        const double w = 1.0 - p;
        for (int c = 0; c < 2; ++c) {
            long off = c * n;
            double jump_in = p * mass[1 - c] / static_cast<double>(n);
            for (long s = 0; s < n; ++s) {
                double acc = pi[off + s] * stay(s);
                if (s > 0) acc += pi[off + s - 1] * right(s - 1);
                if (s < n - 1) acc += pi[off + s + 1] * left(s + 1);
                out[off + s] = jump_in + w * acc;
            }
        }
        return out;
    };
    Operator op = make_operator(Domain::simplex(2 * n), eval, "markov_power");
    return op;
}

/// Stationary distribution by dense linear solve of pi (P - I) = 0 with the
/// normalization row sum(pi) = 1. Desk scale only (O((2n)^3)).
inline Vec stationary(const ChainSpec& spec) {
    DenseMatrix p = dense_transition(spec);
    const std::size_t N = p.rows;
    DenseMatrix a(N, N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) a.at(i, j) = p.at(j, i) - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < N; ++j) a.at(N - 1, j) = 1.0;
    Vec b(N, 0.0);
    b[N - 1] = 1.0;
    return solve_dense(std::move(a), std::move(b));
}

}  // namespace fpkit::markov
