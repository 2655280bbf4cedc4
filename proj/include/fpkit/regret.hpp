#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpkit/domain.hpp"
#include "fpkit/metric.hpp"
#include "fpkit/vec.hpp"

namespace fpkit {

enum class RmKind {
    Ogd,             // x <- x + eta u, unconstrained
    ProjectedOgd,    // x <- P_X(x + eta_t u)
    Ftrl,            // x <- P_X(x1 + eta_{t+1} sum_s u_s)
    AdaGradNorm,     // step eta / sqrt(sum ||u_s||^2)
    AdaGradDiagonal, // per-coordinate adaptive scaling
    AdaGradFull,     // full-matrix adaptive scaling, unconstrained only
    RmsPropNorm,     // EMA variants; heuristics, no regret bound
    AdamNorm,
    RmsPropDiagonal,
    AdamDiagonal,
};

inline const char* to_string(RmKind k) {
    switch (k) {
        case RmKind::Ogd: return "ogd";
        case RmKind::ProjectedOgd: return "projected_ogd";
        case RmKind::Ftrl: return "ftrl";
        case RmKind::AdaGradNorm: return "adagrad_norm";
        case RmKind::AdaGradDiagonal: return "adagrad_diag";
        case RmKind::AdaGradFull: return "adagrad_full";
        case RmKind::RmsPropNorm: return "rmsprop_norm";
        case RmKind::AdamNorm: return "adam_norm";
        case RmKind::RmsPropDiagonal: return "rmsprop_diag";
        case RmKind::AdamDiagonal: return "adam_diag";
    }
    return "?";
}

/// Step-size schedule, 1-based in t. `constant` flags the common case so
/// bound evaluators can pick the sharper constant-step formulas.
struct Schedule {
    std::function<double(long)> fn;
    bool constant = false;
    double value = 0.0;

    double operator()(long t) const { return fn(t); }

    static Schedule constant_of(double v) {
        Schedule s;
        s.fn = [v](long) { return v; };
        s.constant = true;
        s.value = v;
        return s;
    }
    static Schedule of(std::function<double(long)> f) {
        Schedule s;
        s.fn = std::move(f);
        return s;
    }
};

/// Actions and payoffs of one online-linear-optimization run.
struct PayoffLog {
    std::vector<Vec> actions;
    std::vector<Vec> payoffs;

    void add(Vec action, Vec payoff) {
        check_same_dim(action, payoff, "PayoffLog::add");
        actions.push_back(std::move(action));
        payoffs.push_back(std::move(payoff));
    }
    std::size_t size() const { return payoffs.size(); }
};

/// sum_t <u_t, x - x_t>, the gap to the constant action x in hindsight.
inline double regret(const PayoffLog& log, const Vec& x) {
    if (log.size() == 0) throw std::invalid_argument("regret: empty log");
    KahanSum s;
    for (std::size_t t = 0; t < log.size(); ++t) s.add(dot(log.payoffs[t], sub(x, log.actions[t])));
    return s.value();
}

/// Online-linear-optimization update rule: maps payoff u_t to the next
/// action x_{t+1}. Payoffs are gains (ascent convention). Single-owner
/// mutable state; copyable.
class RegretMinimizer {
public:
    // --- factories -------------------------------------------------------
    static RegretMinimizer ogd(Vec x1, double eta) {
        std::size_t d = x1.size();
        RegretMinimizer rm(RmKind::Ogd, Domain::all_space(d), std::move(x1));
        if (!(eta > 0.0)) throw std::invalid_argument("ogd: eta must be positive");
        rm.eta_ = eta;
        return rm;
    }

    static RegretMinimizer projected_ogd(Domain domain, Vec x1,
                                         Schedule eta = Schedule::constant_of(1.0)) {
        RegretMinimizer rm(RmKind::ProjectedOgd, std::move(domain), std::move(x1));
        rm.schedule_ = std::move(eta);
        return rm;
    }

    static RegretMinimizer ftrl(Domain domain, Vec x1,
                                Schedule eta = Schedule::constant_of(0.5)) {
        RegretMinimizer rm(RmKind::Ftrl, std::move(domain), std::move(x1));
        rm.schedule_ = std::move(eta);
        rm.anchor_ = rm.x_;
        rm.payoff_sum_.assign(rm.x_.size(), 0.0);
        rm.payoff_comp_.assign(rm.x_.size(), 0.0);
        return rm;
    }

    static RegretMinimizer adagrad_norm(Domain domain, Vec x1, double eta) {
        RegretMinimizer rm(RmKind::AdaGradNorm, std::move(domain), std::move(x1));
        if (!(eta > 0.0)) throw std::invalid_argument("adagrad_norm: eta must be positive");
        rm.eta_ = eta;
        return rm;
    }

    static RegretMinimizer adagrad_diagonal(Domain domain, Vec x1, double eta, double eps) {
        RegretMinimizer rm(RmKind::AdaGradDiagonal, std::move(domain), std::move(x1));
        if (!(eta > 0.0) || !(eps > 0.0))
            throw std::invalid_argument("adagrad_diagonal: eta and eps must be positive");
        rm.eta_ = eta;
        rm.eps_ = eps;
        rm.coord_sum_.assign(rm.x_.size(), 0.0);
        rm.coord_comp_.assign(rm.x_.size(), 0.0);
        return rm;
    }

    static RegretMinimizer adagrad_full(Domain domain, Vec x1, double eta, double eps) {
        if (!domain.is_all_space())
            throw UnsupportedProjection("adagrad_full: only unconstrained domains are supported");
        RegretMinimizer rm(RmKind::AdaGradFull, std::move(domain), std::move(x1));
        if (!(eta > 0.0) || !(eps > 0.0))
            throw std::invalid_argument("adagrad_full: eta and eps must be positive");
        rm.eta_ = eta;
        rm.eps_ = eps;
        rm.full_acc_ = SymMatrix(rm.x_.size());
        for (std::size_t i = 0; i < rm.x_.size(); ++i) rm.full_acc_.at(i, i) = eps * eps;
        return rm;
    }

    static RegretMinimizer rmsprop_norm(Domain domain, Vec x1, double eta, double beta) {
        RegretMinimizer rm(RmKind::RmsPropNorm, std::move(domain), std::move(x1));
        rm.set_ema_params(eta, beta, 0.0, 0.0);
        return rm;
    }

    static RegretMinimizer adam_norm(Domain domain, Vec x1, double eta, double alpha, double beta) {
        RegretMinimizer rm(RmKind::AdamNorm, std::move(domain), std::move(x1));
        rm.set_ema_params(eta, beta, alpha, 0.0);
        rm.momentum_.assign(rm.x_.size(), 0.0);
        return rm;
    }

    static RegretMinimizer rmsprop_diagonal(Domain domain, Vec x1, double eta, double beta,
                                            double eps) {
        RegretMinimizer rm(RmKind::RmsPropDiagonal, std::move(domain), std::move(x1));
        rm.set_ema_params(eta, beta, 0.0, eps);
        if (!(eps > 0.0)) throw std::invalid_argument("rmsprop_diagonal: eps must be positive");
        rm.coord_sum_.assign(rm.x_.size(), 0.0);
        return rm;
    }

    static RegretMinimizer adam_diagonal(Domain domain, Vec x1, double eta, double alpha,
                                         double beta, double eps) {
        RegretMinimizer rm(RmKind::AdamDiagonal, std::move(domain), std::move(x1));
        rm.set_ema_params(eta, beta, alpha, eps);
        if (!(eps > 0.0)) throw std::invalid_argument("adam_diagonal: eps must be positive");
        rm.coord_sum_.assign(rm.x_.size(), 0.0);
        rm.momentum_.assign(rm.x_.size(), 0.0);
        return rm;
    }

    // --- stepping --------------------------------------------------------
    const Vec& action() const { return x_; }
    long step_count() const { return t_; }
    RmKind kind() const { return kind_; }
    const Domain& domain() const { return domain_; }
    double eta() const { return eta_; }
    double eps() const { return eps_; }

    /// Advances the state on payoff u_t and returns the next action.
    const Vec& step(const Vec& u) {
        if (u.size() != x_.size()) throw std::invalid_argument("RegretMinimizer::step: dimension mismatch");
        if (has_nan(u)) throw std::invalid_argument("RegretMinimizer::step: NaN payoff");
        ++t_;
        switch (kind_) {
            case RmKind::Ogd:
                axpy(x_, eta_, u);
                break;
            case RmKind::ProjectedOgd: {
                double et = schedule_(t_);
                if (!(et > 0.0) || (t_ > 1 && et > last_eta_ + 1e-15))
                    throw std::invalid_argument("projected_ogd: eta_t must be positive and nonincreasing");
                last_eta_ = et;
                Vec y = x_;
                axpy(y, et, u);
                x_ = project(domain_, y);
                break;
            }
            case RmKind::Ftrl: {
                for (std::size_t i = 0; i < u.size(); ++i) kahan_add(payoff_sum_[i], payoff_comp_[i], u[i]);
                double et = schedule_(t_ + 1);
                if (!(et > 0.0) || (t_ > 1 && et > last_eta_ + 1e-15))
                    throw std::invalid_argument("ftrl: eta_t must be positive and nonincreasing");
                last_eta_ = et;
                Vec y = anchor_;
                axpy(y, et, payoff_sum_);
                x_ = project(domain_, y);
                break;
            }
            case RmKind::AdaGradNorm: {
                sum_sq_.add(norm2_sq(u));
                double s = sum_sq_.value();
                if (s > 0.0) {
                    Vec y = x_;
                    axpy(y, eta_ / std::sqrt(s), u);
                    x_ = project(domain_, y);
                }
                // zero accumulator: zero payoffs so far, stay put
                break;
            }
            case RmKind::AdaGradDiagonal: {
                Vec w(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) {
                    kahan_add(coord_sum_[i], coord_comp_[i], u[i] * u[i]);
                    w[i] = std::sqrt(eps_ * eps_ + coord_sum_[i]) / eta_;
                }
                Vec y = x_;
                for (std::size_t i = 0; i < u.size(); ++i) y[i] += u[i] / w[i];
                x_ = project(domain_, Metric::diagonal(w), y);
                break;
            }
            case RmKind::AdaGradFull: {
                for (std::size_t i = 0; i < u.size(); ++i)
                    for (std::size_t j = 0; j < u.size(); ++j) full_acc_.at(i, j) += u[i] * u[j];
                SymEig e = jacobi_eigensym(full_acc_);
                Vec c = e.apply_qt(u);
                // accumulator eigenvalues are >= eps^2 in exact arithmetic;
                // eigensolver noise on near-rank-deficient accumulators can
                // dip below, so clamp before the inverse root
                for (std::size_t i = 0; i < c.size(); ++i)
                    c[i] /= std::sqrt(std::max(e.values[i], eps_ * eps_));
                Vec step_dir = e.apply_q(c);
                axpy(x_, eta_, step_dir);
                break;
            }
            case RmKind::RmsPropNorm: {
                ema_sq_ = beta_ * ema_sq_ + norm2_sq(u);
                if (ema_sq_ > 0.0) {
                    Vec y = x_;
                    axpy(y, eta_ / std::sqrt(ema_sq_), u);
                    x_ = project(domain_, y);
                }
                break;
            }
            case RmKind::AdamNorm: {
                ema_sq_ = beta_ * ema_sq_ + norm2_sq(u);
                for (std::size_t i = 0; i < u.size(); ++i)
                    momentum_[i] = alpha_ * momentum_[i] + u[i];
                if (ema_sq_ > 0.0) {
                    Vec y = x_;
                    axpy(y, eta_ / std::sqrt(ema_sq_), momentum_);
                    x_ = project(domain_, y);
                }
                break;
            }
            case RmKind::RmsPropDiagonal:
            case RmKind::AdamDiagonal: {
                Vec w(u.size());
                for (std::size_t i = 0; i < u.size(); ++i) {
                    coord_sum_[i] = beta_ * coord_sum_[i] + u[i] * u[i];
                    w[i] = std::sqrt(eps_ * eps_ + coord_sum_[i]) / eta_;
                }
                const Vec* dir = &u;
                if (kind_ == RmKind::AdamDiagonal) {
                    for (std::size_t i = 0; i < u.size(); ++i)
                        momentum_[i] = alpha_ * momentum_[i] + u[i];
                    dir = &momentum_;
                }
                Vec y = x_;
                for (std::size_t i = 0; i < u.size(); ++i) y[i] += (*dir)[i] / w[i];
                x_ = project(domain_, Metric::diagonal(w), y);
                break;
            }
        }
        return x_;
    }

    // --- state inspection (tests, bound evaluators) -----------------------
    double payoff_norm_sq_sum() const { return sum_sq_.value(); }
    const Vec& coordinate_sums() const { return coord_sum_; }
    const SymMatrix& full_accumulator() const { return full_acc_; }

    /// A_t = eta^{-1} (eps^2 I + sum u u^T)^{1/2} for the full variant.
    SymMatrix full_scaling_matrix() const {
        SymMatrix r = sqrt_psd(full_acc_);
        for (double& v : r.a) v /= eta_;
        return r;
    }

private:
    RegretMinimizer(RmKind kind, Domain domain, Vec x1)
        : kind_(kind), domain_(std::move(domain)), x_(std::move(x1)) {
        if (x_.size() != domain_.dim())
            throw std::invalid_argument("RegretMinimizer: start point dimension mismatch");
        if (!domain_.contains(x_, 1e-9))
            throw std::invalid_argument("RegretMinimizer: start point outside domain");
    }

    void set_ema_params(double eta, double beta, double alpha, double eps) {
        if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
        if (!(beta > 0.0) || beta >= 1.0) throw std::invalid_argument("beta must be in (0,1)");
        if (alpha < 0.0 || alpha >= 1.0) throw std::invalid_argument("alpha must be in [0,1)");
        eta_ = eta;
        beta_ = beta;
        alpha_ = alpha;
        eps_ = eps;
    }

    static void kahan_add(double& sum, double& comp, double v) {
        double y = v - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }

    RmKind kind_;
    Domain domain_;
    Vec x_;
    long t_ = 0;

    double eta_ = 1.0;
    double eps_ = 0.0;
    double beta_ = 0.0;
    double alpha_ = 0.0;
    Schedule schedule_ = Schedule::constant_of(1.0);
    double last_eta_ = 1.0;  // FTRL monotonicity check

    KahanSum sum_sq_;
    Vec coord_sum_, coord_comp_;
    SymMatrix full_acc_;
    double ema_sq_ = 0.0;
    Vec momentum_;
    Vec payoff_sum_, payoff_comp_;
    Vec anchor_;
};

// --- regret bounds ---------------------------------------------------------

struct RegretBoundParams {
    double eta = 1.0;
    double eps = 0.0;
    Schedule schedule = Schedule::constant_of(1.0);  // ProjectedOgd / Ftrl
};

namespace detail {

inline double adagrad_diag_infimum(const PayoffLog& log) {
    // closed form of the infimum over positive diagonal scalings:
    // sum_i sqrt(sum_t u_{t,i}^2)
    std::size_t d = log.payoffs.front().size();
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        KahanSum s;
        for (const Vec& u : log.payoffs) s.add(u[i] * u[i]);
        total += std::sqrt(s.value());
    }
    return total;
}

inline double adagrad_full_infimum(const PayoffLog& log) {
    // closed form of the infimum over SPD scalings: Tr((sum u u^T)^{1/2})
    std::size_t d = log.payoffs.front().size();
    SymMatrix m(d);
    for (const Vec& u : log.payoffs)
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) m.at(i, j) += u[i] * u[j];
    return sqrt_psd(m).trace();
}

}  // namespace detail

/// Value of the regret guarantee for the given update rule on a finished
/// log; empirical regret must not exceed it. For Ogd this is the exact
/// telescoping identity (including the -||x - x_{T+1}||^2 term the displayed
/// equality drops). When `diameter` is supplied the diameter-tuned forms are
/// evaluated (these presume eta = D/sqrt(2) for the AdaGrad family).
inline double regret_bound(RmKind kind, const RegretBoundParams& p, const PayoffLog& log,
                           const Vec& x, std::optional<double> diameter = {}) {
    if (log.size() == 0) throw std::invalid_argument("regret_bound: empty log");
    const std::size_t T = log.size();
    const std::size_t d = x.size();
    check_same_dim(x, log.actions.front(), "regret_bound");

    KahanSum usq;
    for (const Vec& u : log.payoffs) usq.add(norm2_sq(u));

    double max_d2 = 0.0, max_dinf = 0.0;
    for (const Vec& a : log.actions) {
        max_d2 = std::max(max_d2, dist2(a, x));
        max_dinf = std::max(max_dinf, dist_inf(a, x));
    }

    switch (kind) {
        case RmKind::Ogd: {
            Vec x_next = log.actions.back();
            axpy(x_next, p.eta, log.payoffs.back());
            double a = dist2(x, log.actions.front());
            double b = dist2(x, x_next);
            return (a * a - b * b) / (2.0 * p.eta) + 0.5 * p.eta * usq.value();
        }
        case RmKind::ProjectedOgd: {
            if (p.schedule.constant) {
                double eta = p.schedule.value;
                KahanSum s;
                for (const Vec& u : log.payoffs) s.add(norm2_sq(u));
                double a = dist2(x, log.actions.front());
                return a * a / (2.0 * eta) + 0.5 * eta * s.value();
            }
            KahanSum s;
            for (std::size_t t = 0; t < T; ++t)
                s.add(p.schedule(static_cast<long>(t + 1)) * norm2_sq(log.payoffs[t]));
            double eta_T = p.schedule(static_cast<long>(T));
            return max_d2 * max_d2 / (2.0 * eta_T) + 0.5 * s.value();
        }
        case RmKind::Ftrl: {
            // the schedule is consumed from eta_2 on; the proof runs with
            // the convention eta_1 = eta_2
            KahanSum s;
            for (std::size_t t = 0; t < T; ++t)
                s.add(p.schedule(std::max<long>(2, static_cast<long>(t + 1))) *
                      norm2_sq(log.payoffs[t]));
            double eta_T = p.schedule(std::max<long>(2, static_cast<long>(T)));
            double a = dist2(x, log.actions.front());
            return a * a / (2.0 * eta_T) + 0.5 * s.value();
        }
        case RmKind::AdaGradNorm: {
            if (diameter) return *diameter * std::sqrt(2.0 * usq.value());
            return (max_d2 * max_d2 / (2.0 * p.eta) + p.eta) * std::sqrt(usq.value());
        }
        case RmKind::AdaGradDiagonal: {
            double inf_term = detail::adagrad_diag_infimum(log);
            if (diameter)
                return *diameter *
                       (p.eps * static_cast<double>(d) / std::sqrt(2.0) + std::sqrt(2.0) * inf_term);
            double a = dist2(x, log.actions.front());
            return p.eps / (2.0 * p.eta) * a * a +
                   (max_dinf * max_dinf / (2.0 * p.eta) + p.eta) * inf_term;
        }
        case RmKind::AdaGradFull: {
            double inf_term = detail::adagrad_full_infimum(log);
            if (diameter)
                return *diameter *
                       (p.eps * static_cast<double>(d) / std::sqrt(2.0) + std::sqrt(2.0) * inf_term);
            double a = dist2(x, log.actions.front());
            return p.eps / (2.0 * p.eta) * a * a +
                   (max_d2 * max_d2 / (2.0 * p.eta) + p.eta) * inf_term;
        }
        default:
            throw std::invalid_argument("regret_bound: no bound for heuristic kinds");
    }
}

}  // namespace fpkit
