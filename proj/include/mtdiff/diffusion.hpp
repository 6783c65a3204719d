#pragma once

#include "mtdiff/data.hpp"
#include "mtdiff/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mtdiff {

struct Hyperparams {
    double mu = 0.01;
    double tau = 0.0;

    /// Throws std::invalid_argument unless mu >= 0 and tau >= 0. mu = 0 is
    /// accepted: it freezes the state, which is a useful degenerate run.
    void check() const;
    bool operator==(const Hyperparams&) const = default;
};

/// Algorithm-side description of a diffusion strategy: the clustering the
/// nodes believe in together with the combination (A), measurement-diffusion
/// (C) and regularization (P) matrices built on it.
struct Strategy {
    NetworkSpec network;
    MatrixXd A;
    MatrixXd C;
    MatrixXd P;
};

/// Data-side description: the true clustering and the stream generator.
struct Scenario {
    NetworkSpec truth;
    DataModel model;
};

enum class Variant { Clustered, SpatialRegularized, NonCooperative };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Uniform A, C = I, uniform P on the given clustering.
Strategy clustered_strategy(const NetworkSpec& network);
/// Every node its own cluster: A = I, C = I, uniform P on all neighbor links.
Strategy spatial_strategy(const NetworkSpec& network);
/// A = I, C = I, P = 0 on singleton clusters.
Strategy noncooperative_strategy(const NetworkSpec& network);
Strategy make_strategy(Variant v, const NetworkSpec& network);

/// Block vector w(n) of N blocks of length L.
struct NetworkState {
    VectorXd w;
    int iteration = 0;
};

/// psi_k = w_k + mu sum_{l in N_k ∩ C(k)} c_lk (d_l - x_l^T w_k) x_l
///             + mu tau sum_{l in N_k \ C(k)} (rho_kl + rho_lk)/2 (w_l - w_k)
VectorXd adapt_step(const Strategy& strategy, const VectorXd& w, const std::vector<Sample>& samples,
                    const Hyperparams& hp);

/// w_k = sum_{l in N_k ∩ C(k)} a_lk psi_l
VectorXd combine_step(const Strategy& strategy, const VectorXd& psi);

/// Norm above which a run is declared divergent.
inline constexpr double kDivergenceNorm = 1e12;

struct Trajectory {
    /// (1/N) |w(n) - w*|^2 for n = 0..n_iters, truncated on divergence.
    std::vector<double> msd;
    bool diverged = false;
    std::uint64_t seed = 0;
    std::uint64_t run = 0;
    Hyperparams hp;
    /// w(n_final) - w*; empty when diverged.
    VectorXd final_error;
};

/// Draws one sample per node for the current iteration, in node order, each
/// node from its own stream.
std::vector<Sample> draw_all(const Scenario& scenario, std::vector<Rng>& streams);
std::vector<Rng> node_streams(const Scenario& scenario, std::uint64_t seed, std::uint64_t run);

/// Runs the ATC recursion from w(0) = 0. Data for run `run` are drawn from
/// the substreams of (seed, run, node), so two strategies run on the same
/// (scenario, seed, run) see identical data.
Trajectory run(const Strategy& strategy, const Scenario& scenario, const Hyperparams& hp,
               int n_iters, std::uint64_t seed, std::uint64_t run = 0);

Trajectory run_noncooperative_lms(const Scenario& scenario, double mu, int n_iters,
                                  std::uint64_t seed, std::uint64_t run = 0);

Trajectory run_spatial_reg_lms(const Scenario& scenario, const Hyperparams& hp, int n_iters,
                               std::uint64_t seed, std::uint64_t run = 0);

}  // namespace mtdiff
