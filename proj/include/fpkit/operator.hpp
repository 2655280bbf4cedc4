#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "fpkit/domain.hpp"
#include "fpkit/metric.hpp"
#include "fpkit/vec.hpp"

namespace fpkit {

struct DomainViolation : std::domain_error {
    using std::domain_error::domain_error;
};

/// Evaluatable map F: X -> R^d. Evaluation must be deterministic; operators
/// are immutable after construction and safe to share across threads.
struct Operator {
    std::size_t dim = 0;
    Domain domain = Domain::all_space(0);
    std::function<Vec(const Vec&)> map;
    std::string label;

    Vec operator()(const Vec& x) const {
        if (x.size() != dim) throw std::invalid_argument("Operator: dimension mismatch");
        return map(x);
    }
};

inline Operator make_operator(Domain domain, std::function<Vec(const Vec&)> map,
                              std::string label = {}) {
    Operator op;
    op.dim = domain.dim();
    op.domain = std::move(domain);
    op.map = std::move(map);
    op.label = std::move(label);
    return op;
}

/// F(x) = M x on all of R^d. Fixed points are the kernel of M - I.
inline Operator linear_operator(DenseMatrix m, std::string label = {}) {
    if (m.rows != m.cols) throw std::invalid_argument("linear_operator: matrix must be square");
    std::size_t d = m.rows;
    auto mat = std::make_shared<DenseMatrix>(std::move(m));
    return make_operator(Domain::all_space(d), [mat](const Vec& x) { return mat->apply(x); },
                         std::move(label));
}

struct Residual {
    Vec vec;        // F(x) - x
    double l2 = 0.0;
    double l1 = 0.0;
    double metric_inv = std::numeric_limits<double>::quiet_NaN();  // ||F(x)-x||_{A^-1}
};

/// Fixed-point residual at x; zero exactly at fixed points. Reports a domain
/// violation instead of silently projecting.
inline Residual residual(const Operator& f, const Vec& x, const Metric* metric = nullptr) {
    if (!f.domain.contains(x, 1e-9))
        throw DomainViolation("residual: point lies outside the operator domain");
    Residual r;
    r.vec = sub(f(x), x);
    r.l2 = norm2(r.vec);
    r.l1 = norm1(r.vec);
    if (metric) r.metric_inv = metric->norm(r.vec, true);
    return r;
}

/// F_A = I + A^{-1}(F - I): same fixed points, rescaled displacement.
inline Operator scale_operator(const Operator& f, const Metric& metric) {
    if (metric.dim() != 0 && metric.dim() != f.dim)
        throw std::invalid_argument("scale_operator: metric dimension mismatch");
    Operator g;
    g.dim = f.dim;
    g.domain = f.domain;
    g.label = f.label.empty() ? "scaled" : f.label + "_scaled";
    auto base = f.map;
    g.map = [base, metric](const Vec& x) {
        Vec d = base(x);
        for (std::size_t i = 0; i < x.size(); ++i) d[i] -= x[i];
        Vec step = metric.apply_inverse(d);
        for (std::size_t i = 0; i < x.size(); ++i) step[i] += x[i];
        return step;
    };
    return g;
}

/// G = (I - F)/2, whose zeros are the fixed points of F.
inline Vec displacement(const Operator& f, const Vec& x) {
    if (!f.domain.contains(x, 1e-9))
        throw DomainViolation("displacement: point lies outside the operator domain");
    Vec g = f(x);
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 0.5 * (x[i] - g[i]);
    return g;
}

/// Sampling probe outcome. Violations are counted with a strict margin < 0
/// test so that exact equality cases stay clean; worst_margin is the most
/// negative value of (LHS - RHS) seen.
struct ProbeReport {
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    double max_disagreement = 0.0;  // between the two equivalent checks
    std::vector<double> margins;    // filled only when keep_margins is set

    bool clean() const { return violations == 0; }
};

/// Checks the co-coercivity inequality
///     <G(x')-G(x), x'-x>  >=  ||G(x')-G(x)||_{A^-1}^2
/// together with the equivalent nonexpansiveness of F_A in ||.||_A, and
/// verifies that the two agree pairwise (they are the same quantity up to a
/// factor 4).
inline ProbeReport cocoercivity_probe(const Operator& f, const Metric& metric,
                                      const std::vector<std::pair<Vec, Vec>>& pairs,
                                      bool keep_margins = false) {
    ProbeReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Operator fa = scale_operator(f, metric);
    for (const auto& [x, xp] : pairs) {
        if (!f.domain.contains(x, 1e-9) || !f.domain.contains(xp, 1e-9))
            throw DomainViolation("cocoercivity_probe: sample outside domain");
        Vec gx = displacement(f, x);
        Vec gxp = displacement(f, xp);
        Vec dg = sub(gxp, gx);
        Vec dx = sub(xp, x);
        double lhs = dot(dg, dx);
        double rhs = metric.norm_sq(dg, true);
        double margin = lhs - rhs;

        Vec dfa = sub(fa(xp), fa(x));
        double margin_ne = metric.norm_sq(dx) - metric.norm_sq(dfa);

        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        double disagreement = std::fabs(4.0 * margin - margin_ne) / scale;
        if (disagreement > 1e-9)
            throw std::logic_error("cocoercivity_probe: internal checks disagree");
        rep.max_disagreement = std::max(rep.max_disagreement, disagreement);

        ++rep.samples;
        if (margin < 0.0) ++rep.violations;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (keep_margins) rep.margins.push_back(margin);
    }
    return rep;
}

/// Star variant: one argument pinned at a fixed point x_*. Checks
///     <G(x), x - x_*>  >=  ||G(x)||_{A^-1}^2
/// against quasi-nonexpansiveness of F_A towards x_*.
inline ProbeReport star_cocoercivity_probe(const Operator& f, const Metric& metric,
                                           const Vec& x_star, const std::vector<Vec>& points,
                                           bool keep_margins = false) {
    Residual at_star = residual(f, x_star);
    if (at_star.l2 > 1e-10)
        throw std::invalid_argument("star_cocoercivity_probe: x_star is not a fixed point");
    ProbeReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    Operator fa = scale_operator(f, metric);
    for (const Vec& x : points) {
        if (!f.domain.contains(x, 1e-9))
            throw DomainViolation("star_cocoercivity_probe: sample outside domain");
        Vec gx = displacement(f, x);
        Vec dx = sub(x, x_star);
        double lhs = dot(gx, dx);
        double rhs = metric.norm_sq(gx, true);
        double margin = lhs - rhs;

        Vec dfa = sub(fa(x), x_star);
        double margin_ne = metric.norm_sq(dx) - metric.norm_sq(dfa);

        double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
        double disagreement = std::fabs(4.0 * margin - margin_ne) / scale;
        if (disagreement > 1e-9)
            throw std::logic_error("star_cocoercivity_probe: internal checks disagree");
        rep.max_disagreement = std::max(rep.max_disagreement, disagreement);

        ++rep.samples;
        if (margin < 0.0) ++rep.violations;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        if (keep_margins) rep.margins.push_back(margin);
    }
    return rep;
}

/// Smallest coefficient L such that along the given points
///     ||F(x)-x||_2^2 <= 2 L <F(x)-x, x_* - x>.
/// Near-fixed iterates (residual <= 1e-14) are skipped; +infinity signals a
/// nonpositive denominator with a live residual. Empty sup is 0.
inline double local_nonexpansiveness(const Operator& f, const Vec& x_star,
                                     const std::vector<Vec>& points) {
    Residual at_star = residual(f, x_star);
    if (at_star.l2 > 1e-10)
        throw std::invalid_argument("local_nonexpansiveness: x_star is not a fixed point");
    double sup = 0.0;
    for (const Vec& x : points) {
        Vec u = sub(f(x), x);
        double num = norm2_sq(u);
        if (std::sqrt(num) <= 1e-14) continue;
        double den = 2.0 * dot(u, sub(x_star, x));
        if (den <= 0.0) return std::numeric_limits<double>::infinity();
        sup = std::max(sup, num / den);
    }
    return sup;
}

}  // namespace fpkit
