#include "mtdiff/experiment.hpp"
#include "mtdiff/config.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#ifndef MTDIFF_DATA_DIR
#define MTDIFF_DATA_DIR "data"
#endif

namespace mtdiff {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

MatrixXd resolve(const MatrixRule& rule, const NetworkSpec& net, char which) {
    if (const auto* m = std::get_if<MatrixXd>(&rule)) return *m;
    const auto& name = std::get<std::string>(rule);
    if (which == 'A' && name == "uniform") return build_uniform_A(net);
    if (which == 'A' && name == "identity") return MatrixXd::Identity(net.n_nodes(), net.n_nodes());
    if (which == 'C' && name == "identity") return build_identity_C(net);
    if (which == 'C' && name == "uniform") return build_uniform_C(net);
    if (which == 'P' && name == "uniform") return build_uniform_P(net);
    if (which == 'P' && name == "zero") return MatrixXd::Zero(net.n_nodes(), net.n_nodes());
    throw std::invalid_argument(std::string("unknown rule '") + name + "' for matrix " + which);
}

MatrixRule named_only(const MatrixRule& rule, const char* fallback) {
    if (std::holds_alternative<std::string>(rule)) return rule;
    return std::string(fallback);
}

}  // namespace

Strategy build_strategy(Variant variant, const NetworkSpec& network, const StrategyRules& rules) {
    switch (variant) {
        case Variant::Clustered:
            return Strategy{network, resolve(rules.A, network, 'A'), resolve(rules.C, network, 'C'),
                            resolve(rules.P, network, 'P')};
        case Variant::SpatialRegularized: {
            auto single = network.with_singleton_clusters();
            return Strategy{single, resolve(named_only(rules.A, "uniform"), single, 'A'),
                            resolve(named_only(rules.C, "identity"), single, 'C'),
                            resolve(named_only(rules.P, "uniform"), single, 'P')};
        }
        case Variant::NonCooperative: return noncooperative_strategy(network);
    }
    throw std::invalid_argument("unknown variant");
}

const CurveResult* ExperimentResult::find(Variant v, const Hyperparams& hp) const {
    for (const auto& c : curves)
        if (c.variant == v && c.hp == hp) return &c;
    return nullptr;
}

std::vector<double> average_linear(const std::vector<std::vector<double>>& curves) {
    if (curves.empty()) return {};
    std::vector<double> mean(curves.front().size(), 0.0);
    for (const auto& c : curves) {
        if (c.size() != mean.size()) throw std::invalid_argument("curves differ in length");
        for (std::size_t i = 0; i < c.size(); ++i) mean[i] += c[i];
    }
    const double inv = 1.0 / static_cast<double>(curves.size());
    for (double& v : mean) v *= inv;
    return mean;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

ExperimentResult monte_carlo(const ExperimentConfig& config) {
    if (config.n_runs < 1) throw std::invalid_argument("n_runs must be at least 1");
    if (config.n_iters < 0) throw std::invalid_argument("n_iters must be nonnegative");
    check_model(config.scenario.model, config.scenario.truth);
    for (const auto& hp : config.hyperparams) hp.check();

    const auto start = std::chrono::steady_clock::now();

    struct Job {
        Variant variant;
        Hyperparams hp;
        Strategy strategy;
    };
    std::vector<Job> jobs;
    for (Variant v : config.variants) {
        for (const auto& hp : config.hyperparams) {
            // The non-cooperative strategy has P = 0, so tau has no effect there.
            jobs.push_back(Job{v, hp, build_strategy(v, config.scenario.truth, config.rules)});
            const auto& st = jobs.back().strategy;
            if (auto bad = validate(st.network, st.A, st.C, st.P, hp.tau))
                throw NetworkError(to_string(v) + " strategy: " + bad->message);
        }
    }

    const std::size_t runs = idx(config.n_runs);
    std::vector<Trajectory> slots(jobs.size() * runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < slots.size(); t = next++) {
            const auto& job = jobs[t / runs];
            slots[t] = run(job.strategy, config.scenario, job.hp, config.n_iters, config.seed, t % runs);
        }
    };
    const int n_workers = std::max(1, config.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    }

    ExperimentResult result;
    result.name = config.name;
    result.n_runs = config.n_runs;
    result.n_iters = config.n_iters;
    result.seed = config.seed;

    const bool linear = std::holds_alternative<LinearModelSpec>(config.scenario.model);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        CurveResult curve;
        curve.variant = jobs[j].variant;
        curve.hp = jobs[j].hp;
        std::vector<std::vector<double>> used;
        VectorXd sum;
        VectorXd sum_sq;
        for (std::size_t r = 0; r < runs; ++r) {
            auto& traj = slots[j * runs + r];
            if (traj.diverged) {
                ++curve.n_diverged;
                continue;
            }
            if (sum.size() == 0) {
                sum = VectorXd::Zero(traj.final_error.size());
                sum_sq = VectorXd::Zero(traj.final_error.size());
            }
            sum += traj.final_error;
            sum_sq += traj.final_error.cwiseAbs2();
            used.push_back(std::move(traj.msd));
        }
        curve.n_used = static_cast<int>(used.size());
        curve.sim_msd = average_linear(used);
        if (curve.n_used > 0) {
            const double n = curve.n_used;
            curve.mean_final_error = sum / n;
            curve.var_final_error = curve.n_used > 1
                                        ? VectorXd((sum_sq - n * curve.mean_final_error.cwiseAbs2()) / (n - 1.0))
                                        : VectorXd::Zero(sum.size());
        }
        if (curve.n_diverged > 0) {
            result.flagged = true;
            result.warnings.push_back(to_string(curve.variant) + " mu=" + std::to_string(curve.hp.mu) +
                                      " tau=" + std::to_string(curve.hp.tau) + ": " +
                                      std::to_string(curve.n_diverged) + " diverged runs excluded");
        }
        if (linear && config.theory && curve.variant == Variant::Clustered) {
            const auto moments = build_moments(jobs[j].strategy, config.scenario, curve.hp);
            auto transient = transient_msd(moments, config.n_iters);
            curve.theory_msd = std::move(transient.zeta);
            try {
                curve.theory_steady = steady_state_msd(moments);
            } catch (const TheoryError& e) {
                result.warnings.push_back(std::string("no steady state: ") + e.what());
            }
        }
        result.curves.push_back(std::move(curve));
    }

    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

int choose_horizon(const ExperimentConfig& config, double tol_db, int max_exponent) {
    std::vector<MomentMatrices> moments;
    std::vector<double> steady;
    const auto strategy = build_strategy(Variant::Clustered, config.scenario.truth, config.rules);
    for (const auto& hp : config.hyperparams) {
        moments.push_back(build_moments(strategy, config.scenario, hp));
        steady.push_back(steady_state_msd(moments.back()));
    }
    int horizon = 10;
    for (int e = 1; e <= max_exponent; ++e, horizon *= 10) {
        bool ok = true;
        for (std::size_t i = 0; i < moments.size() && ok; ++i) {
            const auto curve = transient_msd(moments[i], horizon);
            ok = !curve.diverged && std::abs(to_db(curve.zeta.back()) - to_db(steady[i])) <= tol_db;
        }
        if (ok) return horizon;
    }
    throw TheoryError("no horizon up to 10^" + std::to_string(max_exponent) + " reaches steady state");
}

std::string data_dir() {
    if (const char* env = std::getenv("MTDIFF_DATA_DIR")) return env;
    return MTDIFF_DATA_DIR;
}

ExperimentConfig model_validation_config() {
    return to_experiment(load_config(data_dir() + "/model_validation.json"));
}

ExperimentResult experiment_model_validation(const ExperimentConfig& config) { return monte_carlo(config); }

ExperimentResult experiment_model_validation() { return monte_carlo(model_validation_config()); }

ExperimentConfig localization_config(LocalizationScale scale) {
    const char* file = scale == LocalizationScale::Full ? "/localization.json" : "/localization_desk.json";
    return to_experiment(load_config(data_dir() + file));
}

ExperimentResult experiment_localization(LocalizationScale scale) {
    return monte_carlo(localization_config(scale));
}

}  // namespace mtdiff
