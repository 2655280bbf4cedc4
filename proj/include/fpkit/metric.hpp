#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>

#include "fpkit/vec.hpp"

namespace fpkit {

/// Dense symmetric matrix, row-major full storage.
struct SymMatrix {
    std::size_t dim = 0;
    Vec a;

    SymMatrix() = default;
    explicit SymMatrix(std::size_t d) : dim(d), a(d * d, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * dim + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * dim + j]; }

    static SymMatrix identity(std::size_t d) {
        SymMatrix m(d);
        for (std::size_t i = 0; i < d; ++i) m.at(i, i) = 1.0;
        return m;
    }

    static SymMatrix diagonal(const Vec& diag) {
        SymMatrix m(diag.size());
        for (std::size_t i = 0; i < diag.size(); ++i) m.at(i, i) = diag[i];
        return m;
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : a) s = std::max(s, std::fabs(v));
        return s;
    }

    /// Largest relative off-diagonal asymmetry.
    double asymmetry() const {
        double worst = 0.0;
        double scale = std::max(1e-300, max_abs());
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j)
                worst = std::max(worst, std::fabs(at(i, j) - at(j, i)) / scale);
        return worst;
    }

    void symmetrize() {
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = i + 1; j < dim; ++j) {
                double v = 0.5 * (at(i, j) + at(j, i));
                at(i, j) = at(j, i) = v;
            }
    }

    Vec apply(const Vec& x) const {
        if (x.size() != dim) throw std::invalid_argument("SymMatrix::apply: dimension mismatch");
        Vec y(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double s = 0.0;
            const double* row = a.data() + i * dim;
            for (std::size_t j = 0; j < dim; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += at(i, i);
        return s;
    }
};

/// Eigendecomposition of a symmetric matrix: S = Q diag(values) Q^T,
/// columns of Q are eigenvectors, values ascending.
struct SymEig {
    Vec values;
    DenseMatrix q;

    Vec apply_qt(const Vec& x) const {  // Q^T x
        Vec y(values.size(), 0.0);
        for (std::size_t j = 0; j < values.size(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) s += q.at(i, j) * x[i];
            y[j] = s;
        }
        return y;
    }
    Vec apply_q(const Vec& x) const {  // Q x
        Vec y(values.size(), 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < values.size(); ++j) s += q.at(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }
};

/// Cyclic Jacobi for symmetric eigenproblems. Adequate at desk-scale
/// dimensions; residual target ~1e-14 relative.
inline SymEig jacobi_eigensym(SymMatrix s, std::size_t max_sweeps = 64) {
    const std::size_t n = s.dim;
    if (s.asymmetry() > 1e-10)
        throw std::invalid_argument("jacobi_eigensym: matrix is not symmetric");
    s.symmetrize();

    DenseMatrix q(n, n);
    for (std::size_t i = 0; i < n; ++i) q.at(i, i) = 1.0;

    auto off_norm = [&]() {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) sum += s.at(i, j) * s.at(i, j);
        return std::sqrt(2.0 * sum);
    };
    const double scale = std::max(1e-300, s.max_abs() * n);

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        if (off_norm() <= 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                double apq = s.at(p, r);
                if (std::fabs(apq) <= 1e-18 * scale) continue;
                double app = s.at(p, p), aqq = s.at(r, r);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double skp = s.at(k, p), skq = s.at(k, r);
                    s.at(k, p) = c * skp - sn * skq;
                    s.at(k, r) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double spk = s.at(p, k), sqk = s.at(r, k);
                    s.at(p, k) = c * spk - sn * sqk;
                    s.at(r, k) = sn * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double qkp = q.at(k, p), qkq = q.at(k, r);
                    q.at(k, p) = c * qkp - sn * qkq;
                    q.at(k, r) = sn * qkp + c * qkq;
                }
            }
        }
    }
    if (off_norm() > 1e-10 * scale)
        throw std::runtime_error("jacobi_eigensym: did not converge");

    SymEig e;
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.values[i] = s.at(i, i);

    // sort ascending, permuting eigenvector columns accordingly
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return e.values[a] < e.values[b]; });
    Vec vals(n);
    DenseMatrix qs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        vals[j] = e.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) qs.at(i, j) = q.at(i, order[j]);
    }
    e.values = std::move(vals);
    e.q = std::move(qs);
    return e;
}

/// PSD square root via eigendecomposition. Eigenvalues slightly below zero
/// (rank-deficient payoff accumulators) are clamped to zero; anything more
/// negative is rejected.
inline SymMatrix sqrt_psd(const SymMatrix& s) {
    SymEig e = jacobi_eigensym(s);
    const std::size_t n = s.dim;
    double lam_max = e.values.empty() ? 0.0 : e.values.back();
    double clamp_floor = -1e-12 * std::max(1.0, lam_max);
    Vec root(n);
    for (std::size_t i = 0; i < n; ++i) {
        double lam = e.values[i];
        if (lam < clamp_floor)
            throw std::invalid_argument("sqrt_psd: matrix has a negative eigenvalue");
        root[i] = std::sqrt(std::max(lam, 0.0));
    }
    SymMatrix r(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = 0.0;
            for (std::size_t k = 0; k < n; ++k) v += e.q.at(i, k) * root[k] * e.q.at(j, k);
            r.at(i, j) = r.at(j, i) = v;
        }
    return r;
}

/// The scaling object of the adaptive iterations: Euclidean, positive scalar,
/// positive diagonal, or SPD full matrix. Defines <.,.>_A, ||.||_A,
/// ||.||_{A^-1} and A^{-1}v. Immutable after construction.
class Metric {
public:
    struct Euclidean {};
    struct Scalar { double value; };
    struct Diagonal { Vec entries; };
    struct Full {
        SymMatrix matrix;
        SymEig eig;
    };

    static Metric euclidean() { return Metric(Euclidean{}); }

    static Metric scalar(double value) {
        if (!(value > 0.0)) throw std::invalid_argument("Metric::scalar: value must be positive");
        return Metric(Scalar{value});
    }

    static Metric diagonal(Vec entries) {
        for (double v : entries)
            if (!(v > 0.0)) throw std::invalid_argument("Metric::diagonal: entries must be positive");
        return Metric(Diagonal{std::move(entries)});
    }

    static Metric full(SymMatrix m) {
        if (m.asymmetry() > 1e-12)
            throw std::invalid_argument("Metric::full: matrix is not symmetric");
        m.symmetrize();
        Full f;
        f.eig = jacobi_eigensym(m);
        if (f.eig.values.front() <= 0.0)
            throw std::invalid_argument("Metric::full: matrix is not positive definite");
        f.matrix = std::move(m);
        return Metric(std::move(f));
    }

    bool is_full() const { return std::holds_alternative<Full>(v_); }
    bool is_euclidean() const { return std::holds_alternative<Euclidean>(v_); }

    /// 0 when the metric applies to any dimension (Euclidean, Scalar).
    std::size_t dim() const {
        if (auto* d = std::get_if<Diagonal>(&v_)) return d->entries.size();
        if (auto* f = std::get_if<Full>(&v_)) return f->matrix.dim;
        return 0;
    }

    const Vec* diagonal_entries() const {
        if (auto* d = std::get_if<Diagonal>(&v_)) return &d->entries;
        return nullptr;
    }
    const Scalar* scalar_value() const { return std::get_if<Scalar>(&v_); }
    const Full* full_value() const { return std::get_if<Full>(&v_); }

    /// A x
    Vec apply(const Vec& x) const {
        check_dim(x, "Metric::apply");
        if (std::holds_alternative<Euclidean>(v_)) return x;
        if (auto* s = std::get_if<Scalar>(&v_)) return scaled(x, s->value);
        if (auto* d = std::get_if<Diagonal>(&v_)) {
            Vec y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = d->entries[i] * x[i];
            return y;
        }
        return std::get<Full>(v_).matrix.apply(x);
    }

    /// A^{-1} v; round-trip A(A^{-1}v)=v holds to ~1e-10 relative.
    Vec apply_inverse(const Vec& x) const {
        check_dim(x, "Metric::apply_inverse");
        if (std::holds_alternative<Euclidean>(v_)) return x;
        if (auto* s = std::get_if<Scalar>(&v_)) return scaled(x, 1.0 / s->value);
        if (auto* d = std::get_if<Diagonal>(&v_)) {
            Vec y(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] / d->entries[i];
            return y;
        }
        const Full& f = std::get<Full>(v_);
        Vec c = f.eig.apply_qt(x);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] /= f.eig.values[i];
        return f.eig.apply_q(c);
    }

    /// <x, A y>
    double inner(const Vec& x, const Vec& y) const {
        check_same_dim(x, y, "Metric::inner");
        check_dim(x, "Metric::inner");
        if (std::holds_alternative<Euclidean>(v_)) return dot(x, y);
        if (auto* s = std::get_if<Scalar>(&v_)) return s->value * dot(x, y);
        if (auto* d = std::get_if<Diagonal>(&v_)) {
            double sum = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * d->entries[i] * y[i];
            return sum;
        }
        return dot(x, std::get<Full>(v_).matrix.apply(y));
    }

    /// ||x||_A^2, or ||x||_{A^-1}^2 when inverse is set.
    double norm_sq(const Vec& x, bool inverse = false) const {
        check_dim(x, "Metric::norm");
        if (std::holds_alternative<Euclidean>(v_)) return norm2_sq(x);
        if (auto* s = std::get_if<Scalar>(&v_)) {
            double f = inverse ? 1.0 / s->value : s->value;
            return f * norm2_sq(x);
        }
        if (auto* d = std::get_if<Diagonal>(&v_)) {
            double sum = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double w = inverse ? x[i] * x[i] / d->entries[i] : x[i] * x[i] * d->entries[i];
                sum += w;
            }
            return sum;
        }
        const Full& f = std::get<Full>(v_);
        Vec c = f.eig.apply_qt(x);
        double sum = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            sum += inverse ? c[i] * c[i] / f.eig.values[i] : c[i] * c[i] * f.eig.values[i];
        }
        return std::max(0.0, sum);
    }

    /// ||x||_A, or ||x||_{A^-1} when inverse is set.
    double norm(const Vec& x, bool inverse = false) const { return std::sqrt(norm_sq(x, inverse)); }

    struct Stats { double trace; double lambda_max; };

    /// Trace and largest eigenvalue; dimension must be supplied for the
    /// unpinned variants.
    Stats stats(std::size_t dim_hint = 0) const {
        if (std::holds_alternative<Euclidean>(v_)) {
            require_hint(dim_hint);
            return {static_cast<double>(dim_hint), 1.0};
        }
        if (auto* s = std::get_if<Scalar>(&v_)) {
            require_hint(dim_hint);
            return {s->value * static_cast<double>(dim_hint), s->value};
        }
        if (auto* d = std::get_if<Diagonal>(&v_)) {
            double tr = 0.0, mx = 0.0;
            for (double v : d->entries) {
                tr += v;
                mx = std::max(mx, v);
            }
            return {tr, mx};
        }
        const Full& f = std::get<Full>(v_);
        return {f.matrix.trace(), f.eig.values.back()};
    }

private:
    template <class V>
    explicit Metric(V v) : v_(std::move(v)) {}

    void check_dim(const Vec& x, const char* where) const {
        std::size_t d = dim();
        if (d != 0 && x.size() != d)
            throw std::invalid_argument(std::string(where) + ": dimension mismatch");
    }
    static void require_hint(std::size_t dim_hint) {
        if (dim_hint == 0)
            throw std::invalid_argument("Metric::stats: dimension hint required for unpinned metric");
    }

    std::variant<Euclidean, Scalar, Diagonal, Full> v_;
};

}  // namespace fpkit
