#pragma once

#include "mtdiff/network.hpp"
#include "mtdiff/rng.hpp"

#include <iosfwd>
#include <stdexcept>
#include <variant>
#include <vector>

namespace mtdiff {

struct Sample {
    VectorXd x;
    double d = 0.0;
};

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// d_k(n) = x_k(n)^T w*_{C(k)} + z_k(n) with x_k ~ N(0, sigma2_x[k] I_L) and
/// z_k ~ N(0, sigma2_z[k]).
struct LinearModelSpec {
    std::vector<VectorXd> optima;  // one per cluster
    std::vector<double> sigma2_x;  // one per node
    std::vector<double> sigma2_z;  // one per node

    /// Throws ModelError on size mismatches or non-positive input variance.
    /// Noise variances may be zero (noiseless streams).
    void check(const NetworkSpec& spec) const;
    bool operator==(const LinearModelSpec&) const = default;
};

/// Range/bearing observations of one target per cluster.
///
/// For node k with position p_k and target w*, let r = |w* - p_k| and
/// u = (w* - p_k) / r. The regressor is x = u + alpha u_perp + beta u and the
/// reference is d = r + x^T p_k + v, with alpha ~ N(0, sigma_alpha^2),
/// beta ~ N(0, sigma_beta^2), v ~ N(0, sigma_v^2). Then E{x} = u and
/// d - x^T w* = v - r beta, which has zero mean.
struct LocalizationSpec {
    std::vector<Point2> node_positions;
    std::vector<Point2> targets;  // one per cluster
    std::vector<double> sigma_alpha;
    std::vector<double> sigma_beta;
    std::vector<double> sigma_v;

    void check(const NetworkSpec& spec) const;
    bool operator==(const LocalizationSpec&) const;
};

using DataModel = std::variant<LinearModelSpec, LocalizationSpec>;

Sample gen_linear_sample(const LinearModelSpec& model, const NetworkSpec& spec, int node, Rng& rng);

/// Throws ModelError when the node sits on its target.
Sample gen_localization_sample(const LocalizationSpec& model, const NetworkSpec& spec, int node,
                               Rng& rng);

Sample draw_sample(const DataModel& model, const NetworkSpec& spec, int node, Rng& rng);

/// Validates the model against the network (dispatches to check()).
void check_model(const DataModel& model, const NetworkSpec& spec);

/// Block optimum vector w* of length N*L.
VectorXd stacked_optimum(const DataModel& model, const NetworkSpec& spec);

/// Filter length implied by the model (2 for localization).
int model_dimension(const DataModel& model);

/// Writes `n_iters` iterations of the per-node streams of one run as CSV with
/// columns iteration,node,x_1..x_L,d.
void dump_streams_csv(std::ostream& out, const DataModel& model, const NetworkSpec& spec,
                      std::uint64_t master_seed, std::uint64_t run, int n_iters);

}  // namespace mtdiff
