// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fpkit/harness.hpp"
#include "oracles.hpp"

using namespace fpkit;
namespace fs = std::filesystem;

namespace {

struct Checker {
    int failures = 0;
    int index = 0;

    void run(const std::string& name, const std::function<bool(std::string&)>& body,
             double time_cap_s = 0.0) {
        ++index;
        std::string detail;
        bool ok = false;
        auto t0 = std::chrono::steady_clock::now();
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && time_cap_s > 0.0 && secs > time_cap_s) {
            ok = false;
            detail += " [over the " + std::to_string(time_cap_s) + "s budget]";
        }
        std::printf("[%s] %2d %-22s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                    secs, detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

Operator averaged_rotation_operator(std::uint64_t seed, std::size_t d) {
    Rng rng(seed * 7919ULL + 3ULL);
    oracles::Mat q = oracles::random_rotation(d, rng);
    DenseMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m.at(i, j) = 0.5 * q[i][j] + (i == j ? 0.5 : 0.0);
    return linear_operator(std::move(m), "averaged_rotation");
}

Vec seeded_unit_start(std::uint64_t seed, std::size_t d) {
    Rng rng(seed * 104729ULL + 11ULL);
    Vec x = rng.normal_vec(d);
    double n = norm2(x);
    for (double& v : x) v /= n;
    return x;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

bool criterion_km_bound(std::string& detail) {
    // 20 seeded averaged rotations (I+Q)/2, d = 20, x_* = 0:
    // last residual <= 2 |x1| / sqrt(T) at T in {10,100,1000,10000},
    // and the residual sequence is nonincreasing.
    const std::size_t d = 20;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Operator f = averaged_rotation_operator(seed, d);
        Vec x1 = seeded_unit_start(seed, d);
        SolverConfig cfg;
        cfg.iters = 10000;
        IterationTrace tr = km(f, Schedule::constant_of(0.5), x1, cfg);
        if (tr.length() < 10000) {
            detail = "run stopped early";
            return false;
        }
        for (std::size_t i = 1; i < tr.rows.size(); ++i)
            if (tr.rows[i].r_l2 > tr.rows[i - 1].r_l2 + 1e-12) {
                detail = "residual increased at t=" + std::to_string(i + 1);
                return false;
            }
        for (long T : {10L, 100L, 1000L, 10000L}) {
            double bound = 2.0 * norm2(x1) / std::sqrt(static_cast<double>(T));
            double res = tr.rows[T - 1].r_l2;
            worst_ratio = std::max(worst_ratio, res / bound);
            if (res > bound + 1e-9) {
                detail = "bound violated at T=" + std::to_string(T);
                return false;
            }
        }
    }
    std::ostringstream ss;
    ss << "worst residual/bound ratio " << worst_ratio;
    detail = ss.str();
    return true;
}

bool criterion_scheme_equivalence(std::string& detail) {
    // km and the converted gradient-ascent loop produce identical
    // trajectories on 10 random operators, T = 500, <= 1e-12 per step.
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Operator f = averaged_rotation_operator(100 + seed, 12);
        Vec x1 = seeded_unit_start(100 + seed, 12);
        SolverConfig cfg;
        cfg.iters = 500;
        cfg.record_iterates = true;
        IterationTrace a = km(f, Schedule::constant_of(0.5), x1, cfg);
        IterationTrace b =
            convert_and_solve(f, RegretMinimizer::ogd(x1, 1.0), Schedule::constant_of(0.5), cfg);
        if (a.length() != b.length()) {
            detail = "trace lengths differ";
            return false;
        }
        for (long t = 0; t < a.length(); ++t) {
            worst = std::max(worst, dist_inf(a.iterates[t], b.iterates[t]));
            if (worst > 1e-12) {
                detail = "trajectories differ at t=" + std::to_string(t + 1);
                return false;
            }
        }
    }
    std::ostringstream ss;
    ss << "max per-step gap " << worst;
    detail = ss.str();
    return true;
}

bool criterion_regret_identities(std::string& detail) {
    Rng rng(7001);
    // exact telescoping identity, 100 random unconstrained runs
    for (int trial = 0; trial < 100; ++trial) {
        double eta = rng.uniform(0.1, 2.0);
        RegretMinimizer rm = RegretMinimizer::ogd(rng.normal_vec(10), eta);
        PayoffLog log;
        for (int t = 0; t < 200; ++t) {
            Vec u = rng.normal_vec(10);
            log.add(rm.action(), u);
            rm.step(u);
        }
        Vec x = rng.normal_vec(10);
        double actual = regret(log, x);
        RegretBoundParams p;
        p.eta = eta;
        double identity = regret_bound(RmKind::Ogd, p, log, x);
        double scale = std::max(1.0, std::fabs(actual));
        if (std::fabs(identity - actual) > 1e-10 * scale) {
            detail = "telescoping identity off by " + std::to_string(identity - actual);
            return false;
        }
    }
    // adaptive bounds on random bounded logs over a box
    const std::size_t d = 5;
    Domain box = Domain::box_symmetric(d, 1.0);
    const double diam2 = 2.0 * std::sqrt(static_cast<double>(d));
    int violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double eta_n = diam2 / std::sqrt(2.0);
        double eta_d = 2.0 / std::sqrt(2.0);
        RegretMinimizer rms[3] = {
            RegretMinimizer::adagrad_norm(box, rng.uniform_vec(d, -1, 1), eta_n),
            RegretMinimizer::adagrad_diagonal(box, rng.uniform_vec(d, -1, 1), eta_d, 1e-8),
            RegretMinimizer::adagrad_full(Domain::all_space(d), rng.uniform_vec(d, -1, 1), eta_n,
                                          1e-8)};
        RmKind kinds[3] = {RmKind::AdaGradNorm, RmKind::AdaGradDiagonal, RmKind::AdaGradFull};
        double etas[3] = {eta_n, eta_d, eta_n};
        std::vector<Vec> payoffs;
        for (int t = 0; t < 60; ++t) payoffs.push_back(rng.uniform_vec(d, -1, 1));
        Vec x = rng.uniform_vec(d, -1, 1);
        for (int k = 0; k < 3; ++k) {
            PayoffLog log;
            for (const Vec& u : payoffs) {
                log.add(rms[k].action(), u);
                rms[k].step(u);
            }
            RegretBoundParams p;
            p.eta = etas[k];
            p.eps = 1e-8;
            if (regret(log, x) > regret_bound(kinds[k], p, log, x) + 1e-9) ++violations;
        }
    }
    if (violations > 0) {
        detail = std::to_string(violations) + " adaptive bound violations";
        return false;
    }
    detail = "identity exact, 300 adaptive logs clean";
    return true;
}

bool criterion_lemma_suite(std::string& detail) {
    Rng rng(7002);
    int violations = 0;
    // running normalized sums, 1000 sequences
    for (int trial = 0; trial < 1000; ++trial) {
        int T = 1 + static_cast<int>(rng.uniform01() * 60);
        double run = 0.0, lhs = 0.0;
        KahanSum total;
        for (int t = 0; t < T; ++t) {
            double a = rng.uniform01() < 0.15 ? 0.0 : rng.uniform(0.0, 4.0);
            run += a;
            if (run > 0.0) lhs += a / std::sqrt(run);
            total.add(a);
        }
        if (lhs > 2.0 * std::sqrt(total.value()) + 1e-9) ++violations;
    }
    // diagonal-scaling sums, 200 instances with the near-optimal witness
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t d = 6;
        Vec b = rng.uniform_vec(d, 0.0, 2.0);
        double sum_b = 0.0;
        for (double v : b) sum_b += v;
        for (int k = 0; k < 25; ++k) {
            Vec a = rng.uniform_vec(d, 0.05, 4.0);
            double tra = 0.0, q = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                tra += a[i];
                q += b[i] * b[i] / a[i];
            }
            if (sum_b > std::sqrt(tra * q) + 1e-9) ++violations;
        }
        double tra = 0.0, q = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            tra += b[i] + 1e-8;
            q += b[i] * b[i] / (b[i] + 1e-8);
        }
        if (std::fabs(std::sqrt(tra * q) - sum_b) > 1e-5 * std::max(1.0, sum_b)) ++violations;
    }
    // trace inequality for square roots, 1000 SPD pairs at d = 8
    const std::size_t d = 8;
    for (int trial = 0; trial < 1000; ++trial) {
        auto am = oracles::random_spd(d, rng);
        auto bm = oracles::random_spd(d, rng);
        SymMatrix a(d), b(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                a.at(i, j) = am[i][j];
                b.at(i, j) = bm[i][j];
            }
        SymMatrix rb = sqrt_psd(b);
        oracles::Mat rbm(d, Vec(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) rbm[i][k] = rb.at(i, k);
        double corr = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            Vec col(d);
            for (std::size_t i = 0; i < d; ++i) col[i] = am[i][j] - bm[i][j];
            corr += oracles::solve(rbm, col)[j];
        }
        double lhs = sqrt_psd(a).trace();
        double rhs = rb.trace() + 0.5 * corr;
        if (lhs > rhs + 1e-9 * std::max(1.0, std::fabs(rhs))) ++violations;
    }
    // infimum characterization, 200 PSD matrices at d = 8
    for (int trial = 0; trial < 200; ++trial) {
        auto mm = oracles::random_spd(d, rng, 0.0);
        SymMatrix m(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) m.at(i, j) = mm[i][j];
        double lhs = sqrt_psd(m).trace();
        for (int k = 0; k < 50; ++k) {
            auto am = oracles::random_spd(d, rng);
            double tra = 0.0;
            for (std::size_t i = 0; i < d; ++i) tra += am[i][i];
            double tr_inv = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                Vec col(d);
                for (std::size_t i = 0; i < d; ++i) col[i] = mm[i][j];
                tr_inv += oracles::solve(am, col)[j];
            }
            if (lhs > std::sqrt(tra * tr_inv) + 1e-9 * std::max(1.0, std::sqrt(tra * tr_inv)))
                ++violations;
        }
        SymEig e = jacobi_eigensym(m);
        SymMatrix astar(d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    double lam = std::max(e.values[k], 0.0);
                    double v = lam > 1e-12 ? std::sqrt(lam) : 1e-8;
                    acc += e.q.at(i, k) * v * e.q.at(j, k);
                }
                astar.at(i, j) = acc;
            }
        oracles::Mat am(d, Vec(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) am[i][k] = astar.at(i, k);
        double tr_inv = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            Vec col(d);
            for (std::size_t i = 0; i < d; ++i) col[i] = mm[i][j];
            tr_inv += oracles::solve(am, col)[j];
        }
        double achieved = std::sqrt(astar.trace() * tr_inv);
        if (std::fabs(achieved - lhs) > 1e-5 * std::max(1.0, lhs)) ++violations;
    }
    if (violations > 0) {
        detail = std::to_string(violations) + " lemma violations";
        return false;
    }
    detail = "all inequality families clean";
    return true;
}

bool criterion_adaptive_bounds(std::string& detail) {
    harness::BoundSuiteOptions opts;
    opts.seeds = 10;
    opts.include_toy = true;
    harness::BoundSuiteResult res = harness::run_bound_suite(opts);
    int bad = 0;
    for (const auto& l : res.lines)
        if (!l.report.satisfied) ++bad;
    if (bad > 0) {
        detail = std::to_string(bad) + " of " + std::to_string(res.lines.size()) +
                 " bound lines violated";
        return false;
    }
    // trajectory coefficients never exceed the known scaling
    for (int s = 0; s < 10; ++s) {
        harness::ScaledTestOperator t = harness::seeded_scaled_operator(s);
        Operator boxed = t.op;
        boxed.domain = Domain::box_symmetric(t.op.dim, 1.0);
        SolverConfig cfg;
        cfg.iters = 2000;
        cfg.x_star = Vec(t.op.dim, 0.0);
        IterationTrace tr = adagrad_norm_fp(boxed, t.x1, 1.0, cfg);
        if (tr.local_coeff_infinite || tr.local_coeff > t.coeff + 1e-9) {
            detail = "trajectory coefficient exceeded the known scaling on seed " +
                     std::to_string(s);
            return false;
        }
    }
    // negative control: the wrong coefficient must be reported as violated
    opts.negative_control = true;
    harness::BoundSuiteResult neg = harness::run_bound_suite(opts);
    if (!(neg.lines.size() == 2 && neg.lines[0].report.satisfied &&
          !neg.lines[1].report.satisfied)) {
        detail = "negative control did not flag the wrong coefficient";
        return false;
    }
    detail = std::to_string(res.lines.size()) + " bound lines ok, negative control flagged";
    return true;
}

bool criterion_toy_reproduction(std::string& detail) {
    Operator f = harness::toy_operator(3.0, 0.5);
    Metric a = Metric::diagonal({2.0, 0.25});
    Operator fa = scale_operator(f, a);
    Rng rng(7003);
    for (int k = 0; k < 100; ++k) {
        Vec x = rng.uniform_vec(2, -5.0, 5.0);
        Vec y = fa(x);
        if (std::hypot(y[0] + x[0], y[1] + x[1]) > 1e-12) {
            detail = "rescaled toy is not exactly the negation";
            return false;
        }
    }
    // one averaged step reaches the fixed point from anywhere
    for (int k = 0; k < 10; ++k) {
        Vec x1 = rng.uniform_vec(2, -5.0, 5.0);
        SolverConfig cfg;
        cfg.iters = 10;
        IterationTrace tr = km(fa, Schedule::constant_of(0.5), x1, cfg);
        if (tr.length() < 2 || tr.rows[1].r_l2 > 1e-12) {
            detail = "averaged step missed the fixed point";
            return false;
        }
    }
    // the unscaled operator with alpha = 4 diverges at the eigenvalue rate
    Operator f4 = harness::toy_operator(4.0, 0.5);
    SolverConfig cfg;
    cfg.iters = 1000;
    IterationTrace tr = km(f4, Schedule::constant_of(0.5), {1.0, 1.0}, cfg);
    if (!tr.diverged) {
        detail = "expanding toy was not flagged as divergent";
        return false;
    }
    // growth-factor oracle: power the averaged matrix directly
    double m[2] = {1.0, 1.0};
    double prev_res = 0.0, ratio_oracle = 0.0;
    for (long t = 1; t <= tr.length(); ++t) {
        double res = std::hypot(-5.0 * m[0], -0.5 * m[1]);
        if (t == tr.length()) ratio_oracle = res / prev_res;
        prev_res = res;
        m[0] *= -1.5;  // (1 + (-4))/2
        m[1] *= 0.75;  // (1 + 0.5)/2
    }
    double ratio = tr.rows[tr.rows.size() - 1].r_l2 / tr.rows[tr.rows.size() - 2].r_l2;
    if (!(ratio >= 1.5 - 0.015 && std::fabs(ratio - ratio_oracle) <= 0.01 * ratio_oracle)) {
        detail = "asymptotic growth " + std::to_string(ratio) + " vs oracle " +
                 std::to_string(ratio_oracle);
        return false;
    }
    std::ostringstream ss;
    ss << "growth factor " << ratio << " matches eigenvalue oracle";
    detail = ss.str();
    return true;
}

bool criterion_markov(std::string& detail) {
    // n = 200 clusters, p = 1e-6, T = 5000, uniform start
    markov::ChainSpec spec{200, 1e-6};
    Operator f = markov::build(spec);
    Vec x1(400, 1.0 / 400.0);
    SolverConfig cfg;
    cfg.iters = 5000;
    IterationTrace power_tr = picard(f, x1, cfg);
    IterationTrace ada_tr = adagrad_norm_fp(f, x1, 0.001, cfg);
    Vec oracle = oracles::markov_stationary(200, 1e-6);

    double power_l1 = power_tr.min_l1();
    double ada_l1 = ada_tr.min_l1();
    double dist = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i)
        dist += std::fabs(power_tr.best_point[i] - oracle[i]);

    std::ostringstream ss;
    ss << "min l1 residuals: power " << power_l1 << ", adaptive " << ada_l1
       << " (need <= 1e-8); argmin-to-oracle l1 " << dist << " (need <= 1e-6)";
    detail = ss.str();
    return power_l1 <= 1e-8 && ada_l1 <= 1e-8 && dist <= 1e-6;
}

bool criterion_denoise(std::string& detail) {
    rof::Image img = rof::synthetic_image(64, 64);
    Rng rng(0);
    rof::add_gaussian_noise(img, 0.1, rng);

    rof::Spec tuned{img, 0.1, 0.2, 0.2, 1.0};
    Operator f_tuned = rof::build(tuned);
    SolverConfig cfg0;
    cfg0.iters = 500;
    IterationTrace km_ok = km(f_tuned, Schedule::constant_of(0.5), rof::initial_state(tuned), cfg0);
    bool ok1 = km_ok.rows.back().r_l2 <= 1e-3 * km_ok.first_l2;

    rof::Spec untuned{img, 0.1, 1.0, 1.0, 1.0};
    Operator f_untuned = rof::build(untuned);
    IterationTrace km_bad =
        km(f_untuned, Schedule::constant_of(0.5), rof::initial_state(untuned), cfg0);
    bool ok2 = km_bad.diverged || km_bad.rows.back().r_l2 > km_bad.first_l2;

    SolverConfig cfg1;
    cfg1.iters = 2000;
    // adaptive step parameter tuned to 10, recorded in run manifests
    IterationTrace ada = adagrad_norm_fp(f_untuned, rof::initial_state(untuned), 10.0, cfg1);
    bool ok3 = ada.best_l2 <= 1e-2 * ada.first_l2;

    std::ostringstream ss;
    ss << "averaged/tuned ratio " << km_ok.rows.back().r_l2 / km_ok.first_l2
       << ", averaged/unit flagged " << (ok2 ? "yes" : "no") << ", adaptive (eta=10) ratio "
       << ada.best_l2 / ada.first_l2;
    detail = ss.str();
    return ok1 && ok2 && ok3;
}

bool criterion_game(std::string& detail) {
    DenseMatrix a = game::sample_payoff(60, 40, 5, 0);
    int sign = game::select_orientation();
    Vec z1 = game::uniform_strategies(60, 40);
    auto gap_at = [&](const Vec& z) {
        return game::duality_gap(a, Vec(z.begin(), z.begin() + 60), Vec(z.begin() + 60, z.end()));
    };

    auto run_km = [&](double gamma) {
        Operator f = game::build_mirror_prox(a, gamma, sign);
        std::vector<double> gaps;
        SolverConfig cfg;
        cfg.iters = 5000;
        cfg.observer = [&gaps, &gap_at](long, const Vec& x, const Residual&) {
            gaps.push_back(gap_at(x));
        };
        km(f, Schedule::constant_of(0.5), z1, cfg);
        return gaps;
    };

    std::vector<double> slow = run_km(1e-3);
    double gap_slow_final = slow.back();
    bool ok1 = gap_slow_final <= 1e-6;

    std::vector<double> fast = run_km(1e-2);
    double gap10 = fast.size() > 9 ? fast[9] : fast.back();
    bool ok2 = fast.back() > gap10;  // the non-convergence flag

    Operator f_fast = game::build_mirror_prox(a, 1e-2, sign);
    SolverConfig cfg;
    cfg.iters = 5000;
    double best_gap = std::numeric_limits<double>::infinity();
    cfg.observer = [&best_gap, &gap_at](long, const Vec& x, const Residual&) {
        best_gap = std::min(best_gap, gap_at(x));
    };
    IterationTrace ada = adagrad_norm_fp(f_fast, z1, 1.0, cfg);
    best_gap = std::min(best_gap, gap_at(ada.final_point));
    bool ok3 = best_gap <= 1e-4;

    std::ostringstream ss;
    ss << "gap@5000 at step 1e-3: " << gap_slow_final << " (need <= 1e-6); step 1e-2 flagged: "
       << (ok2 ? "yes" : "no") << "; adaptive min gap " << best_gap << " (need <= 1e-4)";
    detail = ss.str();
    return ok1 && ok2 && ok3;
}

bool criterion_projection_suite(std::string& detail) {
    Rng rng(7004);
    int violations = 0;
    // oracle equivalence, 500 trials each, d <= 5
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t d = 2 + static_cast<std::size_t>(rng.uniform01() * 4);
        Vec y = rng.uniform_vec(d, -2.0, 2.0);
        Vec ones(d, 1.0);
        if (dist_inf(project_simplex_euclidean(y), oracles::active_set_simplex(y, ones)) > 1e-10)
            ++violations;
        Vec w = rng.uniform_vec(d, 0.2, 5.0);
        if (dist_inf(project_simplex_weighted(y, w), oracles::active_set_simplex(y, w)) > 1e-8)
            ++violations;
    }
    // idempotence, variational inequality, nonexpansiveness across combos
    std::vector<Domain> domains;
    domains.push_back(Domain::box_symmetric(4, 1.0));
    domains.push_back(Domain::simplex(4));
    domains.push_back(Domain::inf_ball(4, 0.5));
    domains.push_back(Domain::product({Domain::simplex(2), Domain::simplex(2)}));
    std::vector<Metric> metrics;
    metrics.push_back(Metric::euclidean());
    metrics.push_back(Metric::scalar(2.0));
    metrics.push_back(Metric::diagonal({0.5, 1.0, 2.0, 4.0}));
    for (const auto& dom : domains)
        for (const auto& metric : metrics) {
            for (int trial = 0; trial < 200; ++trial) {
                Vec y = rng.normal_vec(4);
                Vec p = project(dom, metric, y);
                if (!dom.contains(p, 1e-9)) ++violations;
                if (dist_inf(p, project(dom, metric, p)) > 1e-12) ++violations;
                Vec y2 = rng.normal_vec(4);
                Vec p2 = project(dom, metric, y2);
                if (metric.norm(sub(p, p2)) > metric.norm(sub(y, y2)) + 1e-9) ++violations;
            }
            for (int trial = 0; trial < 5; ++trial) {
                Vec y = rng.normal_vec(4);
                Vec p = project(dom, metric, y);
                for (int k = 0; k < 100; ++k) {
                    Vec w;
                    if (dom.get_if<Domain::Simplex>()) {
                        w = oracles::simplex_point(4, rng);
                    } else if (dom.get_if<Domain::Product>()) {
                        Vec w1 = oracles::simplex_point(2, rng), w2 = oracles::simplex_point(2, rng);
                        w = w1;
                        w.insert(w.end(), w2.begin(), w2.end());
                    } else if (const auto* b = dom.get_if<Domain::Box>()) {
                        w = Vec(4);
                        for (int i = 0; i < 4; ++i) w[i] = rng.uniform(b->lo[i], b->hi[i]);
                    } else {
                        w = Vec(4);
                        for (int i = 0; i < 4; ++i) w[i] = rng.uniform(-0.5, 0.5);
                    }
                    if (metric.inner(sub(y, p), sub(w, p)) > 1e-9) ++violations;
                }
            }
        }
    if (violations > 0) {
        detail = std::to_string(violations) + " projection violations";
        return false;
    }
    detail = "oracle equivalence and projection properties clean";
    return true;
}

bool criterion_probes(std::string& detail) {
    Rng rng(7005);
    // pairwise agreement of the two internal checks across 10 operators
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        harness::ScaledTestOperator t = harness::seeded_scaled_operator(300 + k, 8);
        auto spd = oracles::random_spd(8, rng);
        SymMatrix s(8);
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) s.at(i, j) = spd[i][j];
        Metric metric = Metric::full(s);
        std::vector<std::pair<Vec, Vec>> pairs;
        for (int p = 0; p < 1000; ++p)
            pairs.push_back({rng.normal_vec(8), rng.normal_vec(8)});
        ProbeReport rep = cocoercivity_probe(t.op, metric, pairs);
        worst = std::max(worst, rep.max_disagreement);
        if (rep.max_disagreement > 1e-9) {
            detail = "probe checks disagree";
            return false;
        }
    }
    // the 90-degree rotation is flagged, the negation is clean
    DenseMatrix rot(2, 2);
    rot.at(0, 1) = -1.0;
    rot.at(1, 0) = 1.0;
    Operator frot = linear_operator(std::move(rot));
    DenseMatrix neg(2, 2);
    neg.at(0, 0) = neg.at(1, 1) = -1.0;
    Operator fneg = linear_operator(std::move(neg));
    std::vector<Vec> pts;
    for (int k = 0; k < 10000; ++k) pts.push_back(rng.uniform_vec(2, -1.0, 1.0));
    ProbeReport rot_rep = star_cocoercivity_probe(frot, Metric::euclidean(), {0.0, 0.0}, pts);
    ProbeReport neg_rep = star_cocoercivity_probe(fneg, Metric::euclidean(), {0.0, 0.0}, pts);
    if (rot_rep.violations == 0) {
        detail = "rotation boundary case was not flagged";
        return false;
    }
    if (neg_rep.violations != 0) {
        detail = "negation was flagged spuriously";
        return false;
    }
    std::ostringstream ss;
    ss << "max check disagreement " << worst << "; rotation flagged on " << rot_rep.violations
       << "/10000 samples, negation clean";
    detail = ss.str();
    return true;
}

bool criterion_determinism(std::string& detail) {
    nlohmann::json j;
    j["experiment"] = "game";
    j["problem"] = {{"m", 20}, {"n_cols", 16}, {"rank", 3}, {"gamma_mp", 0.02}};
    j["iters"] = 500;
    j["seed"] = 0;
    j["solvers"] = nlohmann::json::array(
        {std::string("km"), std::string("adagrad_norm"), std::string("adam_norm")});

    fs::path base = fs::temp_directory_path() / "fpkit_acceptance_determinism";
    fs::remove_all(base);
    fs::path d1 = base / "a", d2 = base / "b";
    for (const fs::path& dir : {d1, d2}) {
        fs::create_directories(dir);
        j["out"] = dir.string();
        harness::run_experiment(harness::parse_config(j));
        harness::plot_runs({(dir / "game_km.csv").string(),
                            (dir / "game_adagrad_norm.csv").string(),
                            (dir / "game_adam_norm.csv").string()},
                           "duality_gap", (dir / "plot.svg").string());
    }
    for (const char* name :
         {"game_km.csv", "game_adagrad_norm.csv", "game_adam_norm.csv", "plot.svg"}) {
        if (slurp((d1 / name).string()) != slurp((d2 / name).string())) {
            detail = std::string("bytes differ for ") + name;
            return false;
        }
    }
    fs::remove_all(base);
    detail = "CSV traces and SVG byte-identical across reruns";
    return true;
}

}  // namespace

int main() {
    Checker c;
    c.run("km-bound", criterion_km_bound, 5.0);
    c.run("scheme-equivalence", criterion_scheme_equivalence);
    c.run("regret-identities", criterion_regret_identities);
    c.run("lemma-suite", criterion_lemma_suite, 30.0);
    c.run("adaptive-bounds", criterion_adaptive_bounds);
    c.run("toy-reproduction", criterion_toy_reproduction);
    c.run("markov-desk-scale", criterion_markov, 20.0);
    c.run("denoise-desk-scale", criterion_denoise, 60.0);
    c.run("game-desk-scale", criterion_game, 30.0);
    c.run("projection-suite", criterion_projection_suite);
    c.run("probe-correctness", criterion_probes);
    c.run("determinism", criterion_determinism);

    if (c.failures > 0) {
        std::printf("%d of 12 criteria FAILED\n", c.failures);
        return 1;
    }
    std::printf("all 12 criteria passed\n");
    return 0;
}
