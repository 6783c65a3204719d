// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "mtdiff/config.hpp"
#include "mtdiff/experiment.hpp"
#include "mtdiff/io.hpp"
#include "mtdiff/theory.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace mtdiff;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
    std::printf("criterion %d: %s  %s  [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

MatrixXd kron(const MatrixXd& X, const MatrixXd& Y) {
    MatrixXd out(X.rows() * Y.rows(), X.cols() * Y.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            out.block(i * Y.rows(), j * Y.cols(), Y.rows(), Y.cols()) = X(i, j) * Y;
    return out;
}

double dense_rho(const MatrixXd& M) {
    Eigen::EigenSolver<MatrixXd> eig(M, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

void criterion1(const ExperimentConfig& ex) {
    const auto res = monte_carlo(ex);
    const int n = ex.n_iters;
    const int start = n / 10;
    double worst_path = 0.0, worst_final = 0.0, worst_steady = 0.0;
    bool ok = !res.flagged && res.curves.size() == 3;
    for (const auto& c : res.curves) {
        if (!c.theory_msd || !c.theory_steady || c.sim_msd.size() != static_cast<std::size_t>(n + 1)) {
            ok = false;
            continue;
        }
        for (int i = start; i <= n; ++i)
            worst_path = std::max(worst_path, std::abs(to_db(c.sim_msd[i]) - to_db((*c.theory_msd)[i])));
        worst_final = std::max(worst_final, std::abs(to_db(c.sim_msd[n]) - to_db((*c.theory_msd)[n])));
        worst_steady = std::max(worst_steady, std::abs(to_db(c.sim_msd[n]) - to_db(*c.theory_steady)));
    }
    ok = ok && worst_path <= 2.0 && worst_final <= 1.0 && worst_steady <= 1.0;
    report(1, ok, "theory vs 100-run simulation, 3 (mu,tau) pairs",
           fmt("max |dB| past 10%%: %.3f, final: %.3f, steady vs final: %.3f", worst_path, worst_final,
               worst_steady) +
               fmt(", %.1f s", res.wall_seconds));
}

struct BiasCheck {
    double measured = 0.0;
    double se = 0.0;
    double predicted = 0.0;
    double rel = 0.0;
};

BiasCheck measure_bias(ExperimentConfig ex, const Hyperparams& hp) {
    ex.hyperparams = {hp};
    ex.variants = {Variant::Clustered};
    ex.n_runs = 1000;
    ex.theory = false;
    const auto res = monte_carlo(ex);
    const auto& c = res.curves.front();
    const auto m = build_moments(build_strategy(Variant::Clustered, ex.scenario.truth, ex.rules), ex.scenario, hp);
    const VectorXd pred = bias_limit(m);
    BiasCheck out;
    out.measured = c.mean_final_error.norm();
    out.se = std::sqrt(c.var_final_error.sum() / c.n_used);
    out.predicted = pred.norm();
    out.rel = pred.norm() > 0.0 ? (c.mean_final_error - pred).norm() / pred.norm() : 0.0;
    return out;
}

void criterion2(const ExperimentConfig& ex) {
    const auto biased = measure_bias(ex, {0.01, 1.0});
    const auto untuned = measure_bias(ex, {0.01, 0.0});
    auto equal = ex;
    auto& lin = std::get<LinearModelSpec>(equal.scenario.model);
    for (auto& w : lin.optima) w = lin.optima[0];
    const auto flat = measure_bias(equal, {0.01, 1.0});
    const bool ok = biased.rel <= 0.10 && untuned.measured < 3.0 * untuned.se && flat.measured < 3.0 * flat.se;
    report(2, ok, "bias law over 1000 runs",
           fmt("tau=1: |bias| %.4e vs predicted %.4e, rel err %.3f", biased.measured, biased.predicted, biased.rel) +
               fmt("; tau=0: %.2f SE; equal optima: %.2f SE", untuned.measured / untuned.se, flat.measured / flat.se));
}

void criterion3() {
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    double worst_k = 0.0, worst_rho = 0.0;
    int unconverged = 0;
    const std::vector<std::pair<int, int>> shapes{{1, 1}, {2, 1}, {3, 1}, {2, 2}, {3, 2}, {6, 1}, {1, 3}};
    for (int inst = 0; inst < 20; ++inst) {
        const auto [N, L] = shapes[static_cast<std::size_t>(inst) % shapes.size()];
        // Path graph, alternating clusters of size 1 or 2.
        std::vector<std::pair<int, int>> edges;
        for (int k = 0; k + 1 < N; ++k) edges.emplace_back(k, k + 1);
        std::vector<int> clusters(static_cast<std::size_t>(N));
        for (int k = 0; k < N; ++k) clusters[static_cast<std::size_t>(k)] = k / 2;
        const NetworkSpec net(N, L, edges, clusters);
        LinearModelSpec lin;
        for (int q = 0; q < net.n_clusters(); ++q) lin.optima.push_back(VectorXd::NullaryExpr(L, [&] { return u(rng); }));
        for (int k = 0; k < N; ++k) {
            lin.sigma2_x.push_back(u(rng));
            lin.sigma2_z.push_back(0.01 * u(rng));
        }
        const Hyperparams hp{0.3 * u(rng), u(rng)};
        const auto m = build_moments(clustered_strategy(net), Scenario{net, lin}, hp);

        const MatrixXd K = kron(m.B.transpose(), m.B.transpose());
        const MatrixXd X = MatrixXd::NullaryExpr(m.dim(), m.dim(), [&] { return u(rng) - 1.0; });
        const VectorXd vx = Eigen::Map<const VectorXd>(X.data(), X.size());
        const MatrixXd Y = apply_K(m.B, X);
        const VectorXd vy = Eigen::Map<const VectorXd>(Y.data(), Y.size());
        worst_k = std::max(worst_k, (vy - K * vx).norm() / (K * vx).norm());

        const auto est = k_spectral_radius(m.B);
        if (!est.converged) ++unconverged;
        const double rb = dense_rho(m.B);
        worst_rho = std::max(worst_rho, std::abs(est.radius - rb * rb));
        worst_rho = std::max(worst_rho, std::abs(est.radius - dense_rho(K)));
    }
    const bool ok = worst_k <= 1e-12 && worst_rho <= 1e-6;
    report(3, ok, "Kronecker oracle on 20 instances (N*L <= 6)",
           fmt("max rel err %.2e, max |rho(K) - rho(B)^2| %.2e, unconverged %.0f", worst_k, worst_rho, unconverged));
}

// Textbook ATC diffusion LMS, written independently of the library's step
// functions: psi_k = w_k + mu sum_l c_lk x_l (d_l - x_l^T w_k), w_k = sum_l a_lk psi_l.
std::vector<double> reference_atc(const NetworkSpec& net, const LinearModelSpec& lin, const MatrixXd& A,
                                  const MatrixXd& C, double mu, int n_iters, std::uint64_t seed) {
    const int N = net.n_nodes(), L = net.filter_length();
    const VectorXd ws = stacked_optimum(lin, net);
    std::vector<Rng> streams;
    for (int k = 0; k < N; ++k) streams.push_back(make_stream(seed, 0, static_cast<std::uint64_t>(k)));
    VectorXd w = VectorXd::Zero(N * L);
    std::vector<double> msd{(w - ws).squaredNorm() / N};
    for (int n = 0; n < n_iters; ++n) {
        std::vector<Sample> s;
        for (int k = 0; k < N; ++k) s.push_back(gen_linear_sample(lin, net, k, streams[static_cast<std::size_t>(k)]));
        VectorXd psi = w;
        for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l) {
                if (C(l, k) == 0.0) continue;
                const auto& x = s[static_cast<std::size_t>(l)].x;
                double pred = 0.0;
                for (int j = 0; j < L; ++j) pred += x(j) * w(k * L + j);
                const double g = mu * C(l, k) * (s[static_cast<std::size_t>(l)].d - pred);
                for (int j = 0; j < L; ++j) psi(k * L + j) += g * x(j);
            }
        VectorXd next = VectorXd::Zero(N * L);
        for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l) {
                if (A(l, k) == 0.0) continue;
                for (int j = 0; j < L; ++j) next(k * L + j) += A(l, k) * psi(l * L + j);
            }
        w = next;
        msd.push_back((w - ws).squaredNorm() / N);
    }
    return msd;
}

void criterion4(const ExperimentConfig& ex) {
    const auto& lin0 = std::get<LinearModelSpec>(ex.scenario.model);
    const NetworkSpec single = ex.scenario.truth.with_single_cluster();
    LinearModelSpec lin = lin0;
    lin.optima = {lin0.optima[0]};
    const Scenario sc{single, lin};
    const Strategy s{single, build_uniform_A(single), build_uniform_C(single), build_uniform_P(single)};
    const auto lib = run(s, sc, {0.02, 1.0}, 500, 77);
    const auto ref = reference_atc(single, lin, s.A, s.C, 0.02, 500, 77);
    const bool single_ok = lib.msd == ref;

    const auto sp = run_spatial_reg_lms(ex.scenario, {0.02, 0.0}, 500, 78);
    const auto nc = run_noncooperative_lms(ex.scenario, 0.02, 500, 78);
    const bool spatial_ok = sp.msd == nc.msd && sp.final_error == nc.final_error;

    const auto frozen = run(build_strategy(Variant::Clustered, ex.scenario.truth, ex.rules), ex.scenario, {0.0, 1.0},
                            200, 79);
    const VectorXd ws = stacked_optimum(ex.scenario.model, ex.scenario.truth);
    bool frozen_ok = frozen.final_error == -ws;
    for (double v : frozen.msd) frozen_ok = frozen_ok && v == ws.squaredNorm() / ex.scenario.truth.n_nodes();
    report(4, single_ok && spatial_ok && frozen_ok, "reductions",
           std::string("single cluster == reference ATC: ") + (single_ok ? "bit-identical" : "differs") +
               "; spatial(tau=0) == noncooperative: " + (spatial_ok ? "yes" : "no") +
               "; mu=0 frozen: " + (frozen_ok ? "yes" : "no"));
}

void criterion5(const ExperimentConfig& ex) {
    const auto s = build_strategy(Variant::Clustered, ex.scenario.truth, ex.rules);
    double worst = 0.0;
    int checked = 0;
    for (double tau : {0.0, 0.1, 1.0}) {
        const double bound = step_size_bound(build_moments(s, ex.scenario, {0.01, tau}));
        for (int i = 1; i <= 100; ++i) {
            const double mu = bound * (i < 100 ? i / 100.0 : 1.0 - 1e-9);
            worst = std::max(worst, spectral_radius_B(build_moments(s, ex.scenario, {mu, tau})));
            ++checked;
        }
    }
    auto gross = ex;
    const double bound = step_size_bound(build_moments(s, ex.scenario, {0.01, 0.1}));
    gross.hyperparams = {{10.0 * bound, 0.1}};
    gross.n_runs = 5;
    gross.theory = false;
    const auto res = monte_carlo(gross);
    const bool ok = worst < 1.0 && res.flagged && res.curves[0].n_diverged == gross.n_runs;
    report(5, ok, "stability gate",
           fmt("max rho(B) over %.0f step sizes below the bound: %.9f; mu = 10x bound: %.0f/5 runs diverged",
               checked, worst, res.curves[0].n_diverged));
}

void criterion6(const ExperimentConfig& ex) {
    const auto s = build_strategy(Variant::Clustered, ex.scenario.truth, ex.rules);
    double worst = 0.0;
    for (const auto& hp : ex.hyperparams) {
        const auto m = build_moments(s, ex.scenario, hp);
        const auto curve = transient_msd(m, 100000);
        const double ss = steady_state_msd(m);
        worst = std::max(worst, curve.diverged ? 1.0 : std::abs(curve.zeta.back() - ss) / ss);
    }
    report(6, worst <= 1e-8, "transient at n = 1e5 vs steady state", fmt("max relative gap %.2e", worst));
}

void criterion7() {
    std::string detail;
    bool ok = true;
    for (auto scale : {LocalizationScale::Desk, LocalizationScale::Full}) {
        const auto ex = localization_config(scale);
        const auto res = monte_carlo(ex);
        const Hyperparams hp = ex.hyperparams.front();
        auto final_db = [&](Variant v) {
            const auto* c = res.find(v, hp);
            return c && !c->sim_msd.empty() ? to_db(c->sim_msd.back()) : std::nan("");
        };
        const double cl = final_db(Variant::Clustered), sp = final_db(Variant::SpatialRegularized),
                     nc = final_db(Variant::NonCooperative);
        ok = ok && !res.flagged && cl < sp && sp < nc && nc - cl >= 3.0;
        detail += (scale == LocalizationScale::Desk ? "desk " : "; full ") +
                  fmt("clustered %.2f < spatial %.2f < noncoop %.2f dB", cl, sp, nc);
    }
    report(7, ok, "localization ordering", detail);
}

std::map<std::string, std::string> read_csvs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

void criterion8() {
    const fs::path root = fs::temp_directory_path() / "mtdiff_acceptance_determinism";
    fs::remove_all(root);
    bool ok = true;
    std::size_t files = 0;
    for (const char* name : {"/model_validation.json", "/localization_desk.json"}) {
        auto cfg = load_config(data_dir() + name);
        cfg.experiment.n_runs = 20;
        std::vector<std::map<std::string, std::string>> outputs;
        int tag = 0;
        for (int workers : {1, 1, 3}) {
            cfg.experiment.workers = workers;
            const fs::path dir = root / (cfg.name + std::to_string(tag++));
            write_results(dir, monte_carlo(to_experiment(cfg)), cfg);
            outputs.push_back(read_csvs(dir));
        }
        ok = ok && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
        files += outputs[0].size();
    }
    fs::remove_all(root);
    report(8, ok, "byte-identical CSVs across repeats and worker counts",
           fmt("%.0f CSV files compared over 3 runs each (workers 1, 1, 3)", static_cast<double>(files)));
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const auto ex = model_validation_config();
    const std::pair<int, std::function<void()>> steps[] = {
        {1, [&] { criterion1(ex); }}, {2, [&] { criterion2(ex); }}, {3, [] { criterion3(); }},
        {4, [&] { criterion4(ex); }}, {5, [&] { criterion5(ex); }}, {6, [&] { criterion6(ex); }},
        {7, [] { criterion7(); }},    {8, [] { criterion8(); }},
    };
    for (const auto& [id, step] : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            report(id, false, "exception", e.what());
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d of 8 criteria failed (%.1f s)\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
