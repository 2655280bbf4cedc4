#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpkit/csv.hpp"
#include "fpkit/fixedpoint.hpp"
#include "fpkit/pgm.hpp"
#include "fpkit/problems/game.hpp"
#include "fpkit/problems/markov.hpp"
#include "fpkit/problems/rof.hpp"
#include "fpkit/svg.hpp"
#include "fpkit/version.hpp"

namespace fpkit::harness {

using nlohmann::json;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// --- configuration -----------------------------------------------------------

struct SolverSpec {
    std::string name;
    std::map<std::string, double> params;

    double get(const std::string& key, double fallback) const {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    }
};

struct ExperimentConfig {
    std::string experiment;  // toy | markov | denoise | game
    std::vector<SolverSpec> solvers;
    long iters = 1000;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir = "runs";
    bool paper_scale = false;

    // toy
    double toy_alpha = 3.0;
    double toy_epsilon = 0.5;
    // markov
    long markov_n = 200;
    double markov_p = 1e-6;
    // denoise
    std::string image_path;
    long image_size = 64;
    double noise_std = 0.1;
    double lambda = 0.1;
    double tau = 0.2;
    double sigma = 0.2;
    double theta = 1.0;
    // game
    long game_rows = 60;
    long game_cols = 40;
    long game_rank = 5;
    double game_gamma = 1e-3;
};

inline const std::vector<std::string>& known_solvers() {
    static const std::vector<std::string> names = {
        "power",        "km",           "projected_km", "ftrl",      "adagrad_norm",
        "adagrad_diag", "adagrad_full", "rmsprop_norm", "adam_norm", "rmsprop_diag",
        "adam_diag"};
    return names;
}

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    if (!j.contains("experiment")) throw UsageError("config: missing 'experiment'");
    c.experiment = j.at("experiment").get<std::string>();
    if (c.experiment != "toy" && c.experiment != "markov" && c.experiment != "denoise" &&
        c.experiment != "game")
        throw UsageError("config: unknown experiment '" + c.experiment + "'");

    if (j.contains("iters")) c.iters = j.at("iters").get<long>();
    if (c.iters < 1) throw UsageError("config: iters must be >= 1");
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_given = true;
    }
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("paper_scale")) c.paper_scale = j.at("paper_scale").get<bool>();

    const json problem = j.contains("problem") ? j.at("problem") : json::object();
    auto num = [&](const char* key, double fallback) {
        return problem.contains(key) ? problem.at(key).get<double>() : fallback;
    };
    c.toy_alpha = num("alpha", c.toy_alpha);
    c.toy_epsilon = num("epsilon", c.toy_epsilon);
    c.markov_n = static_cast<long>(num("n", c.paper_scale ? 10000 : 200));
    c.markov_p = num("p", c.paper_scale ? 1e-8 : 1e-6);
    if (problem.contains("image")) c.image_path = problem.at("image").get<std::string>();
    c.image_size = static_cast<long>(num("image_size", c.paper_scale ? 512 : 64));
    c.noise_std = num("noise_std", c.noise_std);
    c.lambda = num("lambda", c.lambda);
    c.tau = num("tau", c.tau);
    c.sigma = num("sigma", c.sigma);
    c.theta = num("theta", c.theta);
    c.game_rows = static_cast<long>(num("m", c.paper_scale ? 600 : 60));
    c.game_cols = static_cast<long>(num("n_cols", c.paper_scale ? 400 : 40));
    c.game_rank = static_cast<long>(num("rank", c.paper_scale ? 30 : 5));
    c.game_gamma = num("gamma_mp", c.game_gamma);

    if (!j.contains("solvers") || !j.at("solvers").is_array() || j.at("solvers").empty())
        throw UsageError("config: 'solvers' must be a non-empty list");
    for (const auto& s : j.at("solvers")) {
        SolverSpec spec;
        if (s.is_string()) {
            spec.name = s.get<std::string>();
        } else {
            spec.name = s.at("name").get<std::string>();
            for (auto it = s.begin(); it != s.end(); ++it)
                if (it.key() != "name") spec.params[it.key()] = it.value().get<double>();
        }
        bool ok = false;
        for (const auto& k : known_solvers()) ok = ok || k == spec.name;
        if (!ok) throw UsageError("config: unknown solver '" + spec.name + "'");
        c.solvers.push_back(std::move(spec));
    }

    if ((c.experiment == "denoise" || c.experiment == "game") && !c.seed_given)
        throw UsageError("config: 'seed' is required for stochastic experiments");
    return c;
}

inline json config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["iters"] = c.iters;
    j["seed"] = c.seed;
    j["out"] = c.out_dir;
    j["paper_scale"] = c.paper_scale;
    json problem;
    if (c.experiment == "toy") {
        problem["alpha"] = c.toy_alpha;
        problem["epsilon"] = c.toy_epsilon;
    } else if (c.experiment == "markov") {
        problem["n"] = c.markov_n;
        problem["p"] = c.markov_p;
    } else if (c.experiment == "denoise") {
        if (!c.image_path.empty()) problem["image"] = c.image_path;
        problem["image_size"] = c.image_size;
        problem["noise_std"] = c.noise_std;
        problem["lambda"] = c.lambda;
        problem["tau"] = c.tau;
        problem["sigma"] = c.sigma;
        problem["theta"] = c.theta;
    } else {
        problem["m"] = c.game_rows;
        problem["n_cols"] = c.game_cols;
        problem["rank"] = c.game_rank;
        problem["gamma_mp"] = c.game_gamma;
    }
    j["problem"] = problem;
    json solvers = json::array();
    for (const auto& s : c.solvers) {
        json e;
        e["name"] = s.name;
        for (const auto& [k, v] : s.params) e[k] = v;
        solvers.push_back(e);
    }
    j["solvers"] = solvers;
    return j;
}

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- seeded operator testbed for bound checking -------------------------------

/// Haar-ish orthogonal matrix via Gram-Schmidt on a Gaussian matrix. The
/// determinant is forced to +1 so that (for even d) the rotation generically
/// has no eigenvalue 1 and the origin is the unique fixed point downstream.
inline DenseMatrix random_special_orthogonal(std::size_t d, Rng& rng) {
    DenseMatrix g(d, d);
    for (auto& v : g.a) v = rng.normal();
    // modified Gram-Schmidt on columns, two passes for orthogonality
    for (std::size_t j = 0; j < d; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < j; ++k) {
                double proj = 0.0;
                for (std::size_t i = 0; i < d; ++i) proj += g.at(i, j) * g.at(i, k);
                for (std::size_t i = 0; i < d; ++i) g.at(i, j) -= proj * g.at(i, k);
            }
        }
        double nrm = 0.0;
        for (std::size_t i = 0; i < d; ++i) nrm += g.at(i, j) * g.at(i, j);
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < d; ++i) g.at(i, j) /= nrm;
    }
    // det(Q) = +-1; read the sign off an elimination on a copy
    DenseMatrix lu = g;
    double det = 1.0;
    const std::size_t n = d;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(lu.at(i, k)) > std::fabs(lu.at(piv, k))) piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu.at(k, j), lu.at(piv, j));
            det = -det;
        }
        det *= lu.at(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = lu.at(i, k) / lu.at(k, k);
            for (std::size_t j = k; j < n; ++j) lu.at(i, j) -= f * lu.at(k, j);
        }
    }
    if (det < 0.0)
        for (std::size_t i = 0; i < d; ++i) g.at(i, 0) = -g.at(i, 0);
    return g;
}

struct ScaledTestOperator {
    Operator op;         // F = I + L (N - I), N = (I+Q)/2; x_* = 0
    double coeff = 1.0;  // the known L
    Vec x1;
};

/// Seeded L-nonexpansive operator with known coefficient and unique fixed
/// point at the origin: F = I + L(N - I) with N = kappa (I+Q)/2. kappa = 1
/// sits on the nonexpansiveness boundary; kappa < 1 contracts, which keeps
/// unconstrained adaptive runs inside an a-priori ball.
inline ScaledTestOperator seeded_scaled_operator(std::uint64_t seed, std::size_t d = 16,
                                                 double kappa = 1.0) {
    Rng rng(seed * 1000003ULL + 17ULL);
    DenseMatrix q = random_special_orthogonal(d, rng);
    double coeff = 0.5 + 3.0 * rng.uniform01();
    DenseMatrix m(d, d);  // I + L(kappa (I+Q)/2 - I)
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m.at(i, j) = 0.5 * coeff * kappa * q.at(i, j) +
                         (i == j ? 1.0 - coeff + 0.5 * coeff * kappa : 0.0);
    ScaledTestOperator out;
    out.op = linear_operator(std::move(m), "seeded_scaled");
    out.coeff = coeff;
    Vec x1 = rng.normal_vec(d);
    double nrm = norm2(x1);
    for (double& v : x1) v = 0.9 * v / nrm;
    out.x1 = std::move(x1);
    return out;
}

inline Operator toy_operator(double alpha, double eps) {
    DenseMatrix m(2, 2);
    m.at(0, 0) = -alpha;
    m.at(1, 1) = 1.0 - eps;
    return linear_operator(std::move(m), "toy");
}

// --- bound suite --------------------------------------------------------------

struct BoundLine {
    std::string subject;
    BoundReport report;
};

struct BoundSuiteResult {
    std::vector<BoundLine> lines;
    bool empty_suite = false;

    bool any_violation() const {
        for (const auto& l : lines)
            if (!l.report.satisfied) return true;
        return false;
    }
};

struct BoundSuiteOptions {
    int seeds = 10;
    bool include_toy = true;
    bool negative_control = false;
};

namespace detail {

inline void restrict_to_box(Operator& op, double half_width) {
    op.domain = Domain::box_symmetric(op.dim, half_width);
}

inline void bound_check_one(std::vector<BoundLine>& lines, const std::string& subject,
                            const Operator& f, const Operator& f_contracted, double coeff,
                            const Metric& a, const Vec& x1) {
    const std::size_t d = f.dim;
    const Vec x_star(d, 0.0);
    const long T = 2000;

    // KM family runs on the nonexpansive rescaled operator
    Operator f_scaled = scale_operator(f, Metric::scalar(coeff));
    SolverConfig cfg;
    cfg.iters = T;
    cfg.x_star = x_star;

    {
        IterationTrace tr = km(f_scaled, Schedule::constant_of(0.5), x1, cfg);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.gamma = Schedule::constant_of(0.5);
        lines.push_back({subject + "/km", theorem_bound(TheoremId::Km, in)});
        lines.push_back({subject + "/km", theorem_bound(TheoremId::KmHeadline, in)});
        in.local_coeff = coeff;
        lines.push_back({subject + "/km", theorem_bound(TheoremId::KmScaled, in)});
    }

    Operator f_box = f;
    restrict_to_box(f_box, 1.0);
    Operator f_scaled_box = f_scaled;
    restrict_to_box(f_scaled_box, 1.0);
    const double diam2 = 2.0 * std::sqrt(static_cast<double>(d));
    const double diam_inf = 2.0;

    {
        IterationTrace tr = projected_km(f_scaled_box, Schedule::constant_of(0.5), x1, cfg);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.gamma = Schedule::constant_of(0.5);
        lines.push_back({subject + "/projected_km", theorem_bound(TheoremId::ProjKm, in)});
    }
    {
        IterationTrace tr = ftrl_fp(f_scaled_box, x1, cfg);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.eta_schedule = Schedule::constant_of(0.5);
        lines.push_back({subject + "/ftrl", theorem_bound(TheoremId::FtrlFp, in)});
    }
    {
        double eta = diam2 / std::sqrt(2.0);
        IterationTrace tr = adagrad_norm_fp(f_box, x1, eta, cfg);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.eta = eta;
        in.local_coeff = tr.local_coeff_infinite
                             ? std::numeric_limits<double>::infinity()
                             : tr.local_coeff;
        in.diameter = diam2;
        lines.push_back({subject + "/adagrad_norm", theorem_bound(TheoremId::AdagradNormGeneral, in)});
        lines.push_back({subject + "/adagrad_norm", theorem_bound(TheoremId::AdagradNormDiameter, in)});
    }
    {
        double eta = diam_inf / std::sqrt(2.0);
        double eps = 1e-8;
        SolverConfig cfg_m = cfg;
        cfg_m.residual_metric = a;
        IterationTrace tr = adagrad_diag_fp(f_box, x1, eta, eps, cfg_m);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.eta = eta;
        in.eps = eps;
        in.A = a;
        in.diameter = diam_inf;
        lines.push_back({subject + "/adagrad_diag", theorem_bound(TheoremId::AdagradDiagGeneral, in)});
        lines.push_back({subject + "/adagrad_diag", theorem_bound(TheoremId::AdagradDiagGeneralL2, in)});
        lines.push_back({subject + "/adagrad_diag", theorem_bound(TheoremId::AdagradDiagDiameter, in)});
        lines.push_back(
            {subject + "/adagrad_diag", theorem_bound(TheoremId::AdagradDiagDiameterL2, in)});
    }
    {
        // unconstrained run: the contracted variant keeps the excursion
        // inside the a-priori ball the diameter-form bounds need
        double d_guess = 3.0 * norm2(x1);
        double eta = d_guess / std::sqrt(2.0);
        double eps = 1e-8;
        SolverConfig cfg_m = cfg;
        cfg_m.residual_metric = a;
        IterationTrace tr = adagrad_full_fp(f_contracted, x1, eta, eps, cfg_m);
        BoundInputs in;
        in.x1 = x1;
        in.x_star = x_star;
        in.trace = &tr;
        in.T = tr.length();
        in.eta = eta;
        in.eps = eps;
        in.A = a;
        in.diameter = d_guess;
        // the diameter guess must dominate the realized excursion for the
        // diameter-form bounds to be sound
        if (tr.max_dist2 > d_guess) {
            BoundReport bad;
            bad.id = TheoremId::AdagradFullDiameter;
            bad.bound = d_guess;
            bad.empirical = tr.max_dist2;
            bad.satisfied = false;
            bad.details = "diameter guess exceeded";
            lines.push_back({subject + "/adagrad_full", bad});
        }
        lines.push_back({subject + "/adagrad_full", theorem_bound(TheoremId::AdagradFullGeneral, in)});
        lines.push_back(
            {subject + "/adagrad_full", theorem_bound(TheoremId::AdagradFullGeneralL2, in)});
        lines.push_back({subject + "/adagrad_full", theorem_bound(TheoremId::AdagradFullDiameter, in)});
        lines.push_back(
            {subject + "/adagrad_full", theorem_bound(TheoremId::AdagradFullDiameterL2, in)});
    }
}

}  // namespace detail

/// Deterministic negative control: KM with gamma = 1/2 on the rescaled
/// rotation by angle 2/sqrt(T). The residual at time T is ~1.21/sqrt(T),
/// comfortably inside the true scaled-KM guarantee and a factor ~6 outside
/// the same guarantee evaluated with L/10.
inline std::pair<BoundLine, BoundLine> negative_control_lines() {
    const long T = 1000;
    const double theta = 2.0 / std::sqrt(static_cast<double>(T));
    const double coeff = 2.0;
    DenseMatrix rot(2, 2);
    rot.at(0, 0) = std::cos(theta);
    rot.at(0, 1) = -std::sin(theta);
    rot.at(1, 0) = std::sin(theta);
    rot.at(1, 1) = std::cos(theta);
    // F = I + coeff (R - I), so the rescaled operator is the rotation itself
    DenseMatrix m(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            m.at(i, j) = (i == j ? 1.0 : 0.0) + coeff * (rot.at(i, j) - (i == j ? 1.0 : 0.0));
    Operator f = linear_operator(std::move(m), "negctl_rotation");
    Operator f_scaled = scale_operator(f, Metric::scalar(coeff));
    Vec x1 = {1.0, 0.0};
    SolverConfig cfg;
    cfg.iters = T;
    cfg.x_star = Vec{0.0, 0.0};
    IterationTrace tr = km(f_scaled, Schedule::constant_of(0.5), x1, cfg);

    BoundInputs in;
    in.x1 = x1;
    in.x_star = Vec{0.0, 0.0};
    in.trace = &tr;
    in.T = tr.length();
    in.local_coeff = coeff;
    BoundLine good{"negctl/correct_L", theorem_bound(TheoremId::KmScaled, in)};
    in.local_coeff = coeff / 10.0;
    BoundLine bad{"negctl/wrong_L_over_10", theorem_bound(TheoremId::KmScaled, in)};
    // the wrong-coefficient claim rescales the empirical residual too
    bad.report.empirical = coeff * tr.last_l2();
    bad.report.satisfied = bad.report.empirical <=
                           bad.report.bound + 1e-9 * std::max(1.0, std::fabs(bad.report.bound));
    return {good, bad};
}

inline BoundSuiteResult run_bound_suite(const BoundSuiteOptions& opts) {
    BoundSuiteResult res;
    if (opts.negative_control) {
        auto [good, bad] = negative_control_lines();
        res.lines.push_back(good);
        res.lines.push_back(bad);
        return res;
    }
    if (opts.include_toy) {
        Operator toy = toy_operator(3.0, 0.5);
        double coeff = (1.0 + 3.0) / 2.0;
        Metric a = Metric::diagonal({(1.0 + 3.0) / 2.0, 0.5 / 2.0});
        detail::bound_check_one(res.lines, "toy", toy, toy, coeff, a, Vec{1.0, 1.0});
    }
    for (int s = 0; s < opts.seeds; ++s) {
        ScaledTestOperator t = seeded_scaled_operator(static_cast<std::uint64_t>(s));
        ScaledTestOperator tc = seeded_scaled_operator(static_cast<std::uint64_t>(s), 16, 0.7);
        Metric a = Metric::diagonal(Vec(t.op.dim, t.coeff));
        detail::bound_check_one(res.lines, "seed" + std::to_string(s), t.op, tc.op, t.coeff, a,
                                t.x1);
    }
    res.empty_suite = res.lines.empty();
    return res;
}

// --- experiment runner ---------------------------------------------------------

struct RunOutcome {
    std::string solver;
    std::map<std::string, double> params;
    std::string csv_path;
    long iterations = 0;
    std::string stop_reason;
    bool diverged_guard = false;
    bool residual_grew = false;
    double first_residual = 0.0;
    double final_residual = 0.0;
    double min_residual = 0.0;
    double wall_seconds = 0.0;
};

struct RunResult {
    std::vector<RunOutcome> runs;
    std::string manifest_path;
    std::vector<std::string> csv_paths;
};

namespace detail {

struct ProblemSetup {
    Operator op;
    Vec x1;
    std::optional<Vec> x_star;
    // extra per-iteration column: name + evaluator (empty name = none)
    std::string extra_column;
    std::function<double(const Vec&)> extra_eval;
    json decisions;
};

inline ProblemSetup make_problem(const ExperimentConfig& c) {
    ProblemSetup ps;
    if (c.experiment == "toy") {
        if (!(c.toy_alpha > 1.0) || !(c.toy_epsilon > 0.0) || !(c.toy_epsilon < 1.0))
            throw UsageError("toy: requires alpha > 1 and epsilon in (0,1)");
        ps.op = toy_operator(c.toy_alpha, c.toy_epsilon);
        ps.x1 = {1.0, 1.0};
        ps.x_star = Vec{0.0, 0.0};
        return ps;
    }
    if (c.experiment == "markov") {
        markov::ChainSpec spec{c.markov_n, c.markov_p};
        ps.op = markov::build(spec);
        ps.x1.assign(2 * c.markov_n, 1.0 / static_cast<double>(2 * c.markov_n));
        if (2 * c.markov_n <= 1200) ps.x_star = markov::stationary(spec);
        return ps;
    }
    if (c.experiment == "denoise") {
        rof::Image img;
        if (!c.image_path.empty()) {
            img = read_pgm(c.image_path);
        } else {
            img = rof::synthetic_image(c.image_size, c.image_size);
        }
        Rng rng(c.seed);
        rof::add_gaussian_noise(img, c.noise_std, rng);
        rof::Spec spec{std::move(img), c.lambda, c.tau, c.sigma, c.theta};
        ps.x1 = rof::initial_state(spec);
        ps.op = rof::build(spec);
        ps.extra_column = "rof_energy";
        ps.extra_eval = [spec](const Vec& z) { return rof::energy(spec, z); };
        ps.decisions["noise_clipping"] = "none";
        ps.decisions["tv_residual"] = "l2 fixed-point residual of the primal-dual operator";
        return ps;
    }
    // game
    DenseMatrix a = game::sample_payoff(c.game_rows, c.game_cols, c.game_rank, c.seed);
    int orientation = game::select_orientation();
    std::size_t m = a.rows, n = a.cols;
    auto shared = std::make_shared<DenseMatrix>(a);
    ps.op = game::build_mirror_prox(std::move(a), c.game_gamma, orientation);
    ps.x1 = game::uniform_strategies(m, n);
    ps.extra_column = "duality_gap";
    ps.extra_eval = [shared, m](const Vec& z) {
        return game::duality_gap(*shared, Vec(z.begin(), z.begin() + m),
                                 Vec(z.begin() + m, z.end()));
    };
    ps.decisions["game_orientation"] = orientation;
    ps.decisions["game_sampler"] = "standard normal rank factors";
    return ps;
}

inline IterationTrace dispatch_solver(const SolverSpec& s, const ProblemSetup& ps,
                                      const SolverConfig& cfg) {
    const double eta = s.get("eta", 1.0);
    const double eps = s.get("epsilon", 1e-8);
    const double beta = s.get("beta", 0.999);
    const double alpha = s.get("alpha", 0.9);
    const double gamma = s.get("gamma", 0.5);
    if (s.name == "power") return picard(ps.op, ps.x1, cfg);
    if (s.name == "km") return km(ps.op, Schedule::constant_of(gamma), ps.x1, cfg);
    if (s.name == "projected_km")
        return projected_km(ps.op, Schedule::constant_of(gamma), ps.x1, cfg);
    if (s.name == "ftrl") return ftrl_fp(ps.op, ps.x1, cfg, Schedule::constant_of(gamma));
    if (s.name == "adagrad_norm") return adagrad_norm_fp(ps.op, ps.x1, eta, cfg);
    if (s.name == "adagrad_diag") return adagrad_diag_fp(ps.op, ps.x1, eta, eps, cfg);
    if (s.name == "adagrad_full") return adagrad_full_fp(ps.op, ps.x1, eta, eps, cfg);
    if (s.name == "rmsprop_norm") return rmsprop_norm_fp(ps.op, ps.x1, eta, beta, cfg);
    if (s.name == "adam_norm") return adam_norm_fp(ps.op, ps.x1, eta, alpha, beta, cfg);
    if (s.name == "rmsprop_diag") return rmsprop_diag_fp(ps.op, ps.x1, eta, beta, eps, cfg);
    if (s.name == "adam_diag") return adam_diag_fp(ps.op, ps.x1, eta, alpha, beta, eps, cfg);
    throw UsageError("unknown solver " + s.name);
}

}  // namespace detail

/// Runs every configured solver on the configured experiment, writing one
/// CSV trace per solver plus a manifest capturing every tunable that shaped
/// the trajectories. Solver failures are recorded without aborting the sweep.
inline RunResult run_experiment(const ExperimentConfig& c) {
    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    detail::ProblemSetup ps = detail::make_problem(c);

    json manifest;
    manifest["version"] = fpkit::version;
    json cfg_json = config_to_json(c);
    manifest["config"] = cfg_json;
    manifest["config_hash"] = fnv1a_hex(cfg_json.dump());
    manifest["rng"] = Rng::name();
    manifest["decisions"] = ps.decisions;
    json runs = json::array();

    RunResult result;
    std::map<std::string, int> name_count;
    for (const auto& solver : c.solvers) {
        int idx = ++name_count[solver.name];
        std::string stem = c.experiment + "_" + solver.name +
                           (idx > 1 ? "_" + std::to_string(idx) : "");
        std::string csv_path = (fs::path(c.out_dir) / (stem + ".csv")).string();

        json run_j;
        run_j["solver"] = solver.name;
        json params_j;
        for (const auto& [k, v] : solver.params) params_j[k] = v;
        run_j["params"] = params_j;
        run_j["csv"] = fs::path(csv_path).filename().string();

        auto t0 = std::chrono::steady_clock::now();
        try {
            // per-iteration extra column values are collected by an observer
            std::vector<double> extra;
            SolverConfig cfg;
            cfg.iters = c.iters;
            cfg.x_star = ps.x_star;
            if (ps.extra_eval) {
                cfg.observer = [&extra, &ps](long, const Vec& x, const Residual&) {
                    extra.push_back(ps.extra_eval(x));
                };
            }
            IterationTrace tr = detail::dispatch_solver(solver, ps, cfg);

            std::vector<std::string> header = {"iter", "residual_l2", "residual_l1",
                                               "min_residual_l2"};
            if (!ps.extra_column.empty()) header.push_back(ps.extra_column);
            if (ps.x_star) header.push_back("distance_to_solution");
            CsvWriter csv(csv_path, header);
            for (std::size_t i = 0; i < tr.rows.size(); ++i) {
                const TraceRow& r = tr.rows[i];
                std::vector<double> row = {static_cast<double>(r.t), r.r_l2, r.r_l1, r.min_l2};
                if (!ps.extra_column.empty()) row.push_back(extra[i]);
                if (ps.x_star) row.push_back(r.dist2);
                csv.row(row);
            }

            RunOutcome out;
            out.solver = solver.name;
            out.params = solver.params;
            out.csv_path = csv_path;
            out.iterations = tr.length();
            out.stop_reason = tr.stop_reason;
            out.diverged_guard = tr.diverged;
            out.first_residual = tr.first_l2;
            out.final_residual = tr.last_l2();
            out.min_residual = tr.best_l2;
            out.residual_grew = tr.last_l2() > tr.first_l2;
            out.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            run_j["iterations_run"] = out.iterations;
            run_j["stop_reason"] = out.stop_reason;
            run_j["diverged_guard"] = out.diverged_guard;
            run_j["residual_grew"] = out.residual_grew;
            run_j["diverged"] = out.diverged_guard || out.residual_grew;
            run_j["first_residual_l2"] = out.first_residual;
            run_j["final_residual_l2"] = out.final_residual;
            run_j["min_residual_l2"] = out.min_residual;
            run_j["wall_seconds"] = out.wall_seconds;
            run_j["error"] = nullptr;

            result.runs.push_back(std::move(out));
            result.csv_paths.push_back(csv_path);
        } catch (const std::exception& e) {
            run_j["error"] = e.what();
            RunOutcome out;
            out.solver = solver.name;
            out.csv_path = csv_path;
            out.stop_reason = std::string("error: ") + e.what();
            result.runs.push_back(std::move(out));
        }
        runs.push_back(run_j);
    }
    manifest["runs"] = runs;

    std::string manifest_path = (fs::path(c.out_dir) / "manifest.json").string();
    std::ofstream mf(manifest_path, std::ios::binary);
    if (!mf) throw std::runtime_error("run_experiment: cannot write manifest");
    mf << manifest.dump(2) << "\n";
    result.manifest_path = manifest_path;
    return result;
}

/// Renders selected CSV columns from several runs into one log-scale SVG.
inline void plot_runs(const std::vector<std::string>& csv_paths, const std::string& column,
                      const std::string& out_path, bool log_x = false) {
    if (csv_paths.empty()) throw UsageError("plot: no CSV files given");
    std::vector<PlotSeries> series;
    for (const auto& path : csv_paths) {
        CsvTable t = read_csv(path);
        PlotSeries s;
        s.label = std::filesystem::path(path).stem().string();
        s.x = t.column("iter");
        s.y = t.column(column);
        series.push_back(std::move(s));
    }
    PlotOptions opt;
    opt.log_y = true;
    opt.log_x = log_x;
    opt.y_label = column;
    write_plot(out_path, series, opt);
}

}  // namespace fpkit::harness
