// Command-line front end: validate, simulate, theory, localization.
//
// Exit codes: 0 success, 1 usage/parse error, 2 validation failure,
// 3 stability warning, 4 runtime failure.

#include "mtdiff/config.hpp"
#include "mtdiff/experiment.hpp"
#include "mtdiff/io.hpp"
#include "mtdiff/theory.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kStability = 3, kRuntime = 4 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::optional<int> iters;
    std::optional<int> workers;
    std::string out;
    std::string scale = "full";
};

void apply_overrides(mtdiff::ConfigFile& cfg, const Options& opt) {
    if (opt.seed) cfg.experiment.seed = *opt.seed;
    if (opt.runs) cfg.experiment.n_runs = *opt.runs;
    if (opt.iters) cfg.experiment.n_iters = *opt.iters;
    if (opt.workers) cfg.experiment.workers = *opt.workers;
}

std::filesystem::path output_dir(const mtdiff::ConfigFile& cfg, const Options& opt) {
    if (!opt.out.empty()) return opt.out;
    if (const char* env = std::getenv("MTDIFF_OUTPUT_DIR")) return std::filesystem::path(env) / cfg.name;
    return cfg.output.directory;
}

int cmd_validate(const mtdiff::ConfigFile& cfg) {
    const auto ex = mtdiff::to_experiment(cfg);
    const auto strategy = mtdiff::build_strategy(mtdiff::Variant::Clustered, ex.scenario.truth, ex.rules);
    const double max_tau = [&] {
        double t = 0.0;
        for (const auto& hp : ex.hyperparams) t = std::max(t, hp.tau);
        return t;
    }();
    if (auto v = mtdiff::validate(strategy.network, strategy.A, strategy.C, strategy.P, max_tau)) {
        std::cout << "validation failed: " << v->message << '\n';
        return kValidation;
    }
    std::cout << "network: " << ex.scenario.truth.n_nodes() << " nodes, " << ex.scenario.truth.n_clusters()
              << " clusters, L = " << ex.scenario.truth.filter_length() << ": ok\n";
    if (!std::holds_alternative<mtdiff::LinearModelSpec>(ex.scenario.model)) {
        std::cout << "stability checks skipped: moment analysis needs the linear data model\n";
        return kOk;
    }
    bool stable = true;
    for (const auto& hp : ex.hyperparams) {
        const auto m = mtdiff::build_moments(strategy, ex.scenario, hp);
        const double bound = mtdiff::step_size_bound(m);
        const double rho_b = mtdiff::spectral_radius_B(m);
        const auto rho_k = mtdiff::k_spectral_radius(m.B, 1e-10, 200000);
        const bool ok = hp.mu > 0.0 && hp.mu < bound && rho_b < 1.0;
        stable = stable && ok;
        std::printf("mu=%g tau=%g  step-size bound=%.6g  rho(B)=%.9f  rho(K)=%.9f%s  %s\n", hp.mu, hp.tau, bound,
                    rho_b, rho_k.radius, rho_k.converged ? "" : " (not converged)", ok ? "stable" : "UNSTABLE");
    }
    if (!stable) {
        std::cout << "warning: at least one step size violates the mean-stability bound\n";
        return kStability;
    }
    return kOk;
}

int cmd_simulate(const mtdiff::ConfigFile& cfg, const Options& opt) {
    const auto ex = mtdiff::to_experiment(cfg);
    const auto result = mtdiff::monte_carlo(ex);
    const auto dir = output_dir(cfg, opt);
    mtdiff::write_results(dir, result, cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& c : result.curves) {
        const double final_msd = c.sim_msd.empty() ? std::nan("") : c.sim_msd.back();
        std::printf("%-15s mu=%-6g tau=%-6g final MSD %8.3f dB", mtdiff::to_string(c.variant).c_str(), c.hp.mu,
                    c.hp.tau, mtdiff::to_db(final_msd));
        if (c.theory_steady) std::printf("  (theory steady state %8.3f dB)", mtdiff::to_db(*c.theory_steady));
        std::printf("\n");
    }
    std::cout << "results written to " << dir.string() << '\n';
    return result.flagged ? kRuntime : kOk;
}

int cmd_theory(const mtdiff::ConfigFile& cfg, const Options& opt) {
    const auto ex = mtdiff::to_experiment(cfg);
    if (!std::holds_alternative<mtdiff::LinearModelSpec>(ex.scenario.model)) {
        std::cerr << "theory: the moment analysis assumes white Gaussian regressors (linear model); "
                     "localization configs are not supported\n";
        return kValidation;
    }
    const auto entries = mtdiff::evaluate_theory(ex);
    const auto dir = output_dir(cfg, opt);
    mtdiff::write_theory(dir, entries, cfg);
    int code = kOk;
    for (const auto& e : entries) {
        std::printf("mu=%g tau=%g  bound=%.6g  rho(B)=%.9f  bias norm=%.6e  ", e.hp.mu, e.hp.tau, e.step_bound,
                    e.rho_B, e.bias_norm);
        if (e.steady) {
            std::printf("steady-state MSD=%.6e (%.3f dB)\n", *e.steady, mtdiff::to_db(*e.steady));
        } else {
            std::printf("no steady state (rho(K) >= 1)\n");
            code = kStability;
        }
    }
    std::cout << "results written to " << dir.string() << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Clustered multitask diffusion LMS: simulation and theory"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", opt.config, "Configuration file (JSON)");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Output directory (overrides config and MTDIFF_OUTPUT_DIR)");
        sub->add_option("--seed", opt.seed, "Master seed (overrides config)");
        sub->add_option("--runs", opt.runs, "Monte-Carlo runs (overrides config)")->check(CLI::PositiveNumber);
        sub->add_option("--iters", opt.iters, "Iterations per run (overrides config)")->check(CLI::NonNegativeNumber);
        sub->add_option("--workers", opt.workers, "Worker threads (overrides config)")->check(CLI::PositiveNumber);
    };
    auto* validate = app.add_subcommand("validate", "Check a configuration and report stability");
    add_common(validate, true);
    auto* simulate = app.add_subcommand("simulate", "Run the Monte-Carlo experiment of a configuration");
    add_common(simulate, true);
    auto* theory = app.add_subcommand("theory", "Evaluate the mean and mean-square models");
    add_common(theory, true);
    auto* localization = app.add_subcommand("localization", "Simulate the bundled multi-target localization setup");
    add_common(localization, false);
    localization->add_option("--scale", opt.scale, "Bundled setup size")->check(CLI::IsMember({"full", "desk"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        std::string path = opt.config;
        if (localization->parsed() && path.empty())
            path = mtdiff::data_dir() + (opt.scale == "desk" ? "/localization_desk.json" : "/localization.json");
        auto cfg = mtdiff::load_config(path);
        apply_overrides(cfg, opt);
        if (validate->parsed()) return cmd_validate(cfg);
        if (theory->parsed()) return cmd_theory(cfg, opt);
        return cmd_simulate(cfg, opt);
    } catch (const mtdiff::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const mtdiff::NetworkError& e) {
        std::cerr << "validation failed: " << e.what() << '\n';
        return kValidation;
    } catch (const mtdiff::ModelError& e) {
        std::cerr << "validation failed: " << e.what() << '\n';
        return kValidation;
    } catch (const mtdiff::UnstableError& e) {
        std::cerr << "unstable: " << e.what() << '\n';
        return kStability;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
