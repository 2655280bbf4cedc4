#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpkit/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;
constexpr int kExitBoundViolation = 3;

struct FlagOverrides {
    std::string experiment;
    std::vector<std::string> solvers;
    long iters = -1;
    long long seed = -1;
    std::string out_dir;
    bool paper_scale = false;
    double eta = std::nan(""), epsilon = std::nan(""), beta = std::nan(""), alpha = std::nan("");
    double gamma = std::nan(""), gamma_mp = std::nan(""), tau = std::nan(""), sigma = std::nan("");
    double lambda = std::nan(""), theta = std::nan("");
};

nlohmann::json load_config_json(const std::string& path) {
    if (path.empty()) return nlohmann::json::object();
    std::ifstream in(path);
    if (!in) throw fpkit::harness::UsageError("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

// CLI flags override individual fields of the JSON document.
nlohmann::json merge_overrides(nlohmann::json j, const FlagOverrides& f) {
    if (!f.experiment.empty()) j["experiment"] = f.experiment;
    if (f.iters > 0) j["iters"] = f.iters;
    if (f.seed >= 0) j["seed"] = static_cast<std::uint64_t>(f.seed);
    if (!f.out_dir.empty()) j["out"] = f.out_dir;
    if (f.paper_scale) j["paper_scale"] = true;
    auto set_problem = [&](const char* key, double v) {
        if (!std::isnan(v)) j["problem"][key] = v;
    };
    set_problem("tau", f.tau);
    set_problem("sigma", f.sigma);
    set_problem("lambda", f.lambda);
    set_problem("theta", f.theta);
    set_problem("gamma_mp", f.gamma_mp);

    if (!f.solvers.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& name : f.solvers) {
            nlohmann::json s;
            s["name"] = name;
            arr.push_back(s);
        }
        j["solvers"] = arr;
    }
    if (j.contains("solvers") && j["solvers"].is_array()) {
        for (auto& s : j["solvers"]) {
            if (!s.is_object()) continue;
            auto set_solver = [&](const char* key, double v) {
                if (!std::isnan(v)) s[key] = v;
            };
            set_solver("eta", f.eta);
            set_solver("epsilon", f.epsilon);
            set_solver("beta", f.beta);
            set_solver("alpha", f.alpha);
            set_solver("gamma", f.gamma);
        }
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fpkit: regret-based fixed-point iteration benchmark harness"};
    app.require_subcommand(1);

    // --- run ------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "run an experiment sweep and write CSV traces");
    std::string config_path;
    FlagOverrides fo;
    run_cmd->add_option("--config", config_path, "JSON config file");
    run_cmd->add_option("--experiment", fo.experiment, "toy | markov | denoise | game");
    run_cmd->add_option("--solver", fo.solvers, "solver name (repeatable)");
    run_cmd->add_option("--iters", fo.iters, "iteration budget");
    run_cmd->add_option("--seed", fo.seed, "rng seed");
    run_cmd->add_option("--out", fo.out_dir, "output directory");
    run_cmd->add_flag("--paper-scale", fo.paper_scale, "use the paper-scale problem sizes");
    run_cmd->add_option("--eta", fo.eta, "solver step parameter");
    run_cmd->add_option("--epsilon", fo.epsilon, "adaptive scaling floor");
    run_cmd->add_option("--beta", fo.beta, "EMA decay for RMSprop/Adam");
    run_cmd->add_option("--alpha", fo.alpha, "momentum decay for Adam");
    run_cmd->add_option("--gamma", fo.gamma, "averaging weight for km/projected_km/ftrl");
    run_cmd->add_option("--gamma-mp", fo.gamma_mp, "mirror-prox internal step (game)");
    run_cmd->add_option("--tau", fo.tau, "primal step (denoise)");
    run_cmd->add_option("--sigma", fo.sigma, "dual step (denoise)");
    run_cmd->add_option("--lambda", fo.lambda, "TV regularization weight (denoise)");
    run_cmd->add_option("--theta", fo.theta, "extrapolation weight (denoise)");

    // --- check-bounds -----------------------------------------------------
    auto* cb_cmd = app.add_subcommand("check-bounds", "verify the convergence guarantees");
    int cb_seeds = 10;
    bool cb_no_toy = false, cb_negctl = false;
    cb_cmd->add_option("--seeds", cb_seeds, "number of seeded operators (default 10)");
    cb_cmd->add_flag("--no-toy", cb_no_toy, "skip the 2x2 toy operator");
    cb_cmd->add_flag("--negative-control", cb_negctl,
                     "run the wrong-coefficient control; a violation is the expected outcome");

    // --- plot --------------------------------------------------------------
    auto* plot_cmd = app.add_subcommand("plot", "render CSV traces as an SVG");
    std::vector<std::string> plot_files;
    std::string plot_column = "residual_l2";
    std::string plot_out = "plot.svg";
    bool plot_logx = false;
    plot_cmd->add_option("csv", plot_files, "CSV trace files")->required();
    plot_cmd->add_option("--column", plot_column, "column to plot (default residual_l2)");
    plot_cmd->add_option("--out", plot_out, "output SVG path");
    plot_cmd->add_flag("--logx", plot_logx, "logarithmic iteration axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run_cmd->parsed()) {
            fpkit::harness::ExperimentConfig cfg;
            try {
                cfg = fpkit::harness::parse_config(merge_overrides(load_config_json(config_path), fo));
            } catch (const fpkit::harness::UsageError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            } catch (const nlohmann::json::exception& e) {
                std::cerr << "error: bad config: " << e.what() << "\n";
                return kExitUsage;
            }
            fpkit::harness::RunResult res = fpkit::harness::run_experiment(cfg);
            bool any_error = false;
            for (const auto& r : res.runs) {
                bool failed = r.stop_reason.rfind("error:", 0) == 0;
                any_error = any_error || failed;
                std::printf("%-14s %7ld iters  min residual %.6e  %s\n", r.solver.c_str(),
                            r.iterations, r.min_residual,
                            failed ? r.stop_reason.c_str()
                                   : (r.diverged_guard || r.residual_grew ? "diverged" : "ok"));
            }
            std::printf("manifest: %s\n", res.manifest_path.c_str());
            return any_error ? kExitRunFailure : kExitOk;
        }

        if (cb_cmd->parsed()) {
            fpkit::harness::BoundSuiteOptions opts;
            opts.seeds = cb_seeds;
            opts.include_toy = !cb_no_toy;
            opts.negative_control = cb_negctl;
            fpkit::harness::BoundSuiteResult res = fpkit::harness::run_bound_suite(opts);
            if (res.lines.empty()) {
                std::printf("warning: empty bound suite, nothing checked\n");
                return kExitOk;
            }
            std::printf("%-28s %-28s %14s %14s %14s %9s\n", "subject", "theorem", "bound",
                        "empirical", "margin", "status");
            for (const auto& l : res.lines) {
                std::printf("%-28s %-28s %14.6e %14.6e %14.6e %9s\n", l.subject.c_str(),
                            fpkit::to_string(l.report.id), l.report.bound, l.report.empirical,
                            l.report.bound - l.report.empirical,
                            l.report.satisfied ? "ok" : "VIOLATED");
            }
            return res.any_violation() ? kExitBoundViolation : kExitOk;
        }

        if (plot_cmd->parsed()) {
            fpkit::harness::plot_runs(plot_files, plot_column, plot_out, plot_logx);
            std::printf("wrote %s\n", plot_out.c_str());
            return kExitOk;
        }
    } catch (const fpkit::harness::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitUsage;
}
