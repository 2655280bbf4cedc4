#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "fpkit/metric.hpp"
#include "fpkit/vec.hpp"

namespace fpkit {

/// Thrown when a (domain, metric) pair has no supported projection.
struct UnsupportedProjection : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class Domain {
public:
    struct AllSpace { std::size_t dim; };
    struct Box { Vec lo, hi; };
    struct Simplex { std::size_t dim; };
    struct InfBall { std::size_t dim; double radius; };
    struct Product { std::vector<Domain> parts; };

    static Domain all_space(std::size_t d) { return Domain(AllSpace{d}); }

    static Domain box(Vec lo, Vec hi) {
        check_same_dim(lo, hi, "Domain::box");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] <= hi[i])) throw std::invalid_argument("Domain::box: lo > hi");
        return Domain(Box{std::move(lo), std::move(hi)});
    }

    static Domain box_symmetric(std::size_t d, double half_width) {
        return box(Vec(d, -half_width), Vec(d, half_width));
    }

    static Domain simplex(std::size_t d) {
        if (d == 0) throw std::invalid_argument("Domain::simplex: empty");
        return Domain(Simplex{d});
    }

    static Domain inf_ball(std::size_t d, double radius) {
        if (!(radius > 0.0)) throw std::invalid_argument("Domain::inf_ball: radius must be positive");
        return Domain(InfBall{d, radius});
    }

    static Domain product(std::vector<Domain> parts) {
        if (parts.empty()) throw std::invalid_argument("Domain::product: empty");
        return Domain(Product{std::move(parts)});
    }

    std::size_t dim() const {
        if (auto* a = std::get_if<AllSpace>(&v_)) return a->dim;
        if (auto* b = std::get_if<Box>(&v_)) return b->lo.size();
        if (auto* s = std::get_if<Simplex>(&v_)) return s->dim;
        if (auto* i = std::get_if<InfBall>(&v_)) return i->dim;
        const auto& parts = std::get<Product>(v_).parts;
        std::size_t d = 0;
        for (const auto& p : parts) d += p.dim();
        return d;
    }

    bool is_all_space() const {
        if (std::holds_alternative<AllSpace>(v_)) return true;
        if (auto* p = std::get_if<Product>(&v_)) {
            for (const auto& part : p->parts)
                if (!part.is_all_space()) return false;
            return true;
        }
        return false;
    }

    bool contains(const Vec& x, double tol = 1e-10) const {
        if (x.size() != dim()) return false;
        if (std::holds_alternative<AllSpace>(v_)) return true;
        if (auto* b = std::get_if<Box>(&v_)) {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (x[i] < b->lo[i] - tol || x[i] > b->hi[i] + tol) return false;
            return true;
        }
        if (std::holds_alternative<Simplex>(v_)) {
            double sum = 0.0;
            for (double v : x) {
                if (v < -tol) return false;
                sum += v;
            }
            return std::fabs(sum - 1.0) <= tol;
        }
        if (auto* ib = std::get_if<InfBall>(&v_)) {
            for (double v : x)
                if (std::fabs(v) > ib->radius + tol) return false;
            return true;
        }
        const auto& parts = std::get<Product>(v_).parts;
        std::size_t off = 0;
        for (const auto& p : parts) {
            Vec block(x.begin() + off, x.begin() + off + p.dim());
            if (!p.contains(block, tol)) return false;
            off += p.dim();
        }
        return true;
    }

    template <class T>
    const T* get_if() const { return std::get_if<T>(&v_); }

private:
    template <class V>
    explicit Domain(V v) : v_(std::move(v)) {}

    std::variant<AllSpace, Box, Simplex, InfBall, Product> v_;
};

/// Euclidean projection onto the unit simplex, sort-and-threshold.
inline Vec project_simplex_euclidean(const Vec& y) {
    if (has_nan(y)) throw std::invalid_argument("project_simplex_euclidean: NaN input");
    const std::size_t d = y.size();
    Vec u = y;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    std::size_t rho = 0;
    double css_rho = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        css += u[k];
        if (u[k] * static_cast<double>(k + 1) > css - 1.0) {
            rho = k + 1;
            css_rho = css;
        }
    }
    theta = (css_rho - 1.0) / static_cast<double>(rho);
    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = std::max(0.0, y[i] - theta);
    return x;
}

/// argmin over the simplex of sum_i a_i (x_i - y_i)^2: the Mahalanobis
/// projection for a positive diagonal metric. The multiplier mu solves
/// sum_i max(0, y_i - mu/a_i) = 1, monotone in mu; bracketed bisection,
/// then one exact active-set solve to pin the sum at machine precision.
inline Vec project_simplex_weighted(const Vec& y, const Vec& weights) {
    check_same_dim(y, weights, "project_simplex_weighted");
    if (has_nan(y)) throw std::invalid_argument("project_simplex_weighted: NaN input");
    const std::size_t d = y.size();
    for (double a : weights)
        if (!(a > 0.0)) throw std::invalid_argument("project_simplex_weighted: non-positive weight");

    auto sum_at = [&](double mu) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += std::max(0.0, y[i] - mu / weights[i]);
        return s;
    };

    double mu_lo = weights[0] * y[0], mu_hi = weights[0] * y[0], a_max = weights[0];
    for (std::size_t i = 0; i < d; ++i) {
        mu_lo = std::min(mu_lo, weights[i] * y[i]);
        mu_hi = std::max(mu_hi, weights[i] * y[i]);
        a_max = std::max(a_max, weights[i]);
    }
    mu_lo -= a_max;
    double width = std::max(1.0, mu_hi - mu_lo);
    while (sum_at(mu_lo) < 1.0) { mu_lo -= width; width *= 2.0; }
    width = std::max(1.0, mu_hi - mu_lo);
    while (sum_at(mu_hi) > 1.0) { mu_hi += width; width *= 2.0; }

    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (mu_lo + mu_hi);
        double s = sum_at(mid);
        if (std::fabs(s - 1.0) <= 1e-12) { mu_lo = mu_hi = mid; break; }
        if (s > 1.0)
            mu_lo = mid;
        else
            mu_hi = mid;
        if (mu_hi - mu_lo <= 1e-15 * std::max(1.0, std::fabs(mid))) break;
    }
    double mu = 0.5 * (mu_lo + mu_hi);

    // exact solve on the active set identified by the bisection
    double sy = 0.0, sinv = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (y[i] - mu / weights[i] > 0.0) {
            sy += y[i];
            sinv += 1.0 / weights[i];
        }
    }
    if (sinv > 0.0) {
        double mu_exact = (sy - 1.0) / sinv;
        if (std::fabs(sum_at(mu_exact) - 1.0) <= 1e-12) mu = mu_exact;
    }

    Vec x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = std::max(0.0, y[i] - mu / weights[i]);
    return x;
}

/// Componentwise clamp: the exact projection onto Box / InfBall for any
/// diagonal metric (separability).
inline Vec clamp(const Domain& domain, const Vec& y) {
    if (y.size() != domain.dim()) throw std::invalid_argument("clamp: dimension mismatch");
    if (const auto* b = domain.get_if<Domain::Box>()) {
        Vec x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) x[i] = std::min(b->hi[i], std::max(b->lo[i], y[i]));
        return x;
    }
    if (const auto* ib = domain.get_if<Domain::InfBall>()) {
        Vec x(y.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            x[i] = std::min(ib->radius, std::max(-ib->radius, y[i]));
        return x;
    }
    throw std::invalid_argument("clamp: domain must be Box or InfBall");
}

namespace detail {

inline Metric slice_metric(const Metric& metric, std::size_t offset, std::size_t len) {
    if (const Vec* d = metric.diagonal_entries())
        return Metric::diagonal(Vec(d->begin() + offset, d->begin() + offset + len));
    if (const auto* s = metric.scalar_value()) return Metric::scalar(s->value);
    return Metric::euclidean();
}

}  // namespace detail

/// Projection onto `domain` in the Mahalanobis norm of `metric`.
/// Full metrics are only supported on AllSpace; everything the paper's
/// experiments need is diagonal-separable.
inline Vec project(const Domain& domain, const Metric& metric, const Vec& y) {
    if (y.size() != domain.dim()) throw std::invalid_argument("project: dimension mismatch");
    if (metric.dim() != 0 && metric.dim() != y.size())
        throw std::invalid_argument("project: metric dimension mismatch");
    if (has_nan(y)) throw std::invalid_argument("project: NaN input");

    if (domain.get_if<Domain::AllSpace>()) return y;

    if (metric.is_full())
        throw UnsupportedProjection("project: Full metric is only supported on AllSpace");

    if (domain.get_if<Domain::Box>() || domain.get_if<Domain::InfBall>()) return clamp(domain, y);

    if (domain.get_if<Domain::Simplex>()) {
        if (const Vec* d = metric.diagonal_entries()) return project_simplex_weighted(y, *d);
        return project_simplex_euclidean(y);  // Scalar metric rescales the objective only
    }

    const auto* prod = domain.get_if<Domain::Product>();
    Vec out(y.size());
    std::size_t off = 0;
    for (const auto& part : prod->parts) {
        std::size_t len = part.dim();
        Vec block(y.begin() + off, y.begin() + off + len);
        Vec pb = project(part, detail::slice_metric(metric, off, len), block);
        std::copy(pb.begin(), pb.end(), out.begin() + off);
        off += len;
    }
    return out;
}

inline Vec project(const Domain& domain, const Vec& y) {
    return project(domain, Metric::euclidean(), y);
}

}  // namespace fpkit
