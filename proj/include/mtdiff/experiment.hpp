#pragma once

#include "mtdiff/diffusion.hpp"
#include "mtdiff/theory.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace mtdiff {

/// How a matrix of the clustered strategy is obtained: a named rule
/// ("uniform", "identity") or explicit entries.
using MatrixRule = std::variant<std::string, MatrixXd>;

struct StrategyRules {
    MatrixRule A = std::string("uniform");
    MatrixRule C = std::string("identity");
    MatrixRule P = std::string("uniform");
};

/// Builds the strategy for `variant`. Explicit matrices apply to the
/// clustered variant only; the baselines always use their own rules.
Strategy build_strategy(Variant variant, const NetworkSpec& network, const StrategyRules& rules);

struct ExperimentConfig {
    std::string name = "experiment";
    Scenario scenario;
    StrategyRules rules;
    std::vector<Variant> variants{Variant::Clustered};
    std::vector<Hyperparams> hyperparams;
    int n_runs = 100;
    int n_iters = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    /// Attach transient and steady-state theory to clustered linear-model curves.
    bool theory = true;
};

struct CurveResult {
    Variant variant = Variant::Clustered;
    Hyperparams hp;
    /// Pointwise mean of the linear MSD over non-diverged runs.
    std::vector<double> sim_msd;
    int n_used = 0;
    int n_diverged = 0;
    /// Mean and per-entry sample variance of w(n_iters) - w* over used runs.
    VectorXd mean_final_error;
    VectorXd var_final_error;
    std::optional<std::vector<double>> theory_msd;
    std::optional<double> theory_steady;
};

struct ExperimentResult {
    std::string name;
    std::vector<CurveResult> curves;
    int n_runs = 0;
    int n_iters = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    /// Set when any run diverged and was excluded.
    bool flagged = false;
    std::vector<std::string> warnings;

    const CurveResult* find(Variant v, const Hyperparams& hp) const;
};

/// Runs every (variant, hyperparameter) pair over n_runs runs with
/// substreams of the master seed. Runs execute on up to `workers` threads;
/// the reduction is over run index, so the result does not depend on the
/// worker count.
ExperimentResult monte_carlo(const ExperimentConfig& config);

/// Pointwise mean of linear-domain curves (all of equal length).
std::vector<double> average_linear(const std::vector<std::vector<double>>& curves);

double to_db(double linear);

/// Smallest 10^k (k >= 1) such that the theoretical transient of every
/// hyperparameter pair is within `tol_db` of its steady state at that index.
int choose_horizon(const ExperimentConfig& config, double tol_db = 0.1, int max_exponent = 6);

/// Directory with the bundled configuration files.
std::string data_dir();

/// Bundled model-validation experiment (15 nodes, 3 clusters, L = 2).
ExperimentConfig model_validation_config();
ExperimentResult experiment_model_validation();
ExperimentResult experiment_model_validation(const ExperimentConfig& config);

enum class LocalizationScale { Desk, Full };
/// Bundled localization experiment: 40 nodes / 2 targets (desk) or
/// 120 nodes / 4 targets (full).
ExperimentConfig localization_config(LocalizationScale scale = LocalizationScale::Full);
ExperimentResult experiment_localization(LocalizationScale scale = LocalizationScale::Full);

}  // namespace mtdiff
