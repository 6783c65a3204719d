#include "mtdiff/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace mtdiff {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double network_msd(const VectorXd& w, const VectorXd& w_star, int n_nodes) {
    return (w - w_star).squaredNorm() / static_cast<double>(n_nodes);
}

}  // namespace

void Hyperparams::check() const {
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("step size mu must be nonnegative");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("regularization tau must be nonnegative");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Clustered: return "clustered";
        case Variant::SpatialRegularized: return "spatial";
        case Variant::NonCooperative: return "noncooperative";
    }
    return "unknown";
}

Variant variant_from_string(const std::string& name) {
    if (name == "clustered") return Variant::Clustered;
    if (name == "spatial") return Variant::SpatialRegularized;
    if (name == "noncooperative") return Variant::NonCooperative;
    throw std::invalid_argument("unknown algorithm variant '" + name + "'");
}

Strategy clustered_strategy(const NetworkSpec& network) {
    return Strategy{network, build_uniform_A(network), build_identity_C(network), build_uniform_P(network)};
}

Strategy spatial_strategy(const NetworkSpec& network) {
    return clustered_strategy(network.with_singleton_clusters());
}

Strategy noncooperative_strategy(const NetworkSpec& network) {
    auto singleton = network.with_singleton_clusters();
    const int n = network.n_nodes();
    return Strategy{singleton, MatrixXd::Identity(n, n), MatrixXd::Identity(n, n), MatrixXd::Zero(n, n)};
}

Strategy make_strategy(Variant v, const NetworkSpec& network) {
    switch (v) {
        case Variant::Clustered: return clustered_strategy(network);
        case Variant::SpatialRegularized: return spatial_strategy(network);
        case Variant::NonCooperative: return noncooperative_strategy(network);
    }
    throw std::invalid_argument("unknown variant");
}

VectorXd adapt_step(const Strategy& strategy, const VectorXd& w, const std::vector<Sample>& samples,
                    const Hyperparams& hp) {
    const auto& net = strategy.network;
    const int L = net.filter_length();
    VectorXd psi = w;
    for (int k = 0; k < net.n_nodes(); ++k) {
        double* pk = psi.data() + k * L;
        const double* wk = w.data() + k * L;
        for (int l : net.intra_neighbors(k)) {
            const double c = strategy.C(l, k);
            if (c == 0.0) continue;
            const auto& s = samples[idx(l)];
            double pred = 0.0;
            for (int j = 0; j < L; ++j) pred += s.x(j) * wk[j];
            const double g = hp.mu * c * (s.d - pred);
            for (int j = 0; j < L; ++j) pk[j] += g * s.x(j);
        }
        if (hp.tau == 0.0) continue;
        for (int l : net.inter_neighbors(k)) {
            const double rho = 0.5 * (strategy.P(k, l) + strategy.P(l, k));
            if (rho == 0.0) continue;
            const double g = hp.mu * hp.tau * rho;
            const double* wl = w.data() + l * L;
            for (int j = 0; j < L; ++j) pk[j] += g * (wl[j] - wk[j]);
        }
    }
    return psi;
}

VectorXd combine_step(const Strategy& strategy, const VectorXd& psi) {
    const auto& net = strategy.network;
    const int L = net.filter_length();
    VectorXd w = VectorXd::Zero(psi.size());
    for (int k = 0; k < net.n_nodes(); ++k) {
        double* wk = w.data() + k * L;
        for (int l : net.intra_neighbors(k)) {
            const double a = strategy.A(l, k);
            if (a == 0.0) continue;
            const double* pl = psi.data() + l * L;
            for (int j = 0; j < L; ++j) wk[j] += a * pl[j];
        }
    }
    return w;
}

std::vector<Rng> node_streams(const Scenario& scenario, std::uint64_t seed, std::uint64_t run) {
    std::vector<Rng> streams;
    streams.reserve(idx(scenario.truth.n_nodes()));
    for (int k = 0; k < scenario.truth.n_nodes(); ++k)
        streams.push_back(make_stream(seed, run, static_cast<std::uint64_t>(k)));
    return streams;
}

std::vector<Sample> draw_all(const Scenario& scenario, std::vector<Rng>& streams) {
    std::vector<Sample> samples;
    samples.reserve(streams.size());
    for (int k = 0; k < scenario.truth.n_nodes(); ++k)
        samples.push_back(draw_sample(scenario.model, scenario.truth, k, streams[idx(k)]));
    return samples;
}

Trajectory run(const Strategy& strategy, const Scenario& scenario, const Hyperparams& hp, int n_iters,
               std::uint64_t seed, std::uint64_t run) {
    hp.check();
    if (n_iters < 0) throw std::invalid_argument("iteration count must be nonnegative");
    const auto& net = strategy.network;
    if (net.n_nodes() != scenario.truth.n_nodes() || net.filter_length() != scenario.truth.filter_length())
        throw std::invalid_argument("strategy and scenario disagree on network dimensions");

    const VectorXd w_star = stacked_optimum(scenario.model, scenario.truth);
    auto streams = node_streams(scenario, seed, run);

    Trajectory traj;
    traj.seed = seed;
    traj.run = run;
    traj.hp = hp;
    traj.msd.reserve(idx(n_iters + 1));

    NetworkState state{VectorXd::Zero(w_star.size()), 0};
    traj.msd.push_back(network_msd(state.w, w_star, net.n_nodes()));
    for (int n = 0; n < n_iters; ++n) {
        auto samples = draw_all(scenario, streams);
        state.w = combine_step(strategy, adapt_step(strategy, state.w, samples, hp));
        state.iteration = n + 1;
        const double norm = state.w.norm();
        if (!std::isfinite(norm) || norm > kDivergenceNorm) {
            traj.diverged = true;
            return traj;
        }
        traj.msd.push_back(network_msd(state.w, w_star, net.n_nodes()));
    }
    traj.final_error = state.w - w_star;
    return traj;
}

Trajectory run_noncooperative_lms(const Scenario& scenario, double mu, int n_iters, std::uint64_t seed,
                                  std::uint64_t run) {
    return mtdiff::run(noncooperative_strategy(scenario.truth), scenario, Hyperparams{mu, 0.0}, n_iters, seed, run);
}

Trajectory run_spatial_reg_lms(const Scenario& scenario, const Hyperparams& hp, int n_iters, std::uint64_t seed,
                               std::uint64_t run) {
    return mtdiff::run(spatial_strategy(scenario.truth), scenario, hp, n_iters, seed, run);
}

}  // namespace mtdiff
