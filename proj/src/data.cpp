#include "mtdiff/data.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

namespace mtdiff {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

}  // namespace

void LinearModelSpec::check(const NetworkSpec& spec) const {
    const auto n = idx(spec.n_nodes());
    require(optima.size() == idx(spec.n_clusters()),
            "linear model has " + std::to_string(optima.size()) + " optima for " +
                std::to_string(spec.n_clusters()) + " clusters");
    for (const auto& w : optima)
        require(w.size() == spec.filter_length(), "optimum length differs from filter length");
    require(sigma2_x.size() == n, "sigma2_x needs one entry per node");
    require(sigma2_z.size() == n, "sigma2_z needs one entry per node");
    for (double s : sigma2_x) require(s > 0.0 && std::isfinite(s), "input variances must be positive");
    for (double s : sigma2_z) require(s >= 0.0 && std::isfinite(s), "noise variances must be nonnegative");
}

void LocalizationSpec::check(const NetworkSpec& spec) const {
    const auto n = idx(spec.n_nodes());
    require(spec.filter_length() == 2, "localization requires filter length 2");
    require(node_positions.size() == n, "localization needs one position per node");
    require(targets.size() == idx(spec.n_clusters()), "localization needs one target per cluster");
    for (std::size_t i = 0; i < targets.size(); ++i)
        for (std::size_t j = i + 1; j < targets.size(); ++j)
            require(targets[i].x != targets[j].x || targets[i].y != targets[j].y, "targets must be distinct");
    for (const auto* s : {&sigma_alpha, &sigma_beta, &sigma_v}) {
        require(s->size() == n, "localization noise levels need one entry per node");
        for (double v : *s) require(v >= 0.0 && std::isfinite(v), "noise standard deviations must be nonnegative");
    }
}

bool LocalizationSpec::operator==(const LocalizationSpec& o) const {
    auto same = [](const std::vector<Point2>& a, const std::vector<Point2>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].x != b[i].x || a[i].y != b[i].y) return false;
        return true;
    };
    return same(node_positions, o.node_positions) && same(targets, o.targets) && sigma_alpha == o.sigma_alpha &&
           sigma_beta == o.sigma_beta && sigma_v == o.sigma_v;
}

Sample gen_linear_sample(const LinearModelSpec& model, const NetworkSpec& spec, int node, Rng& rng) {
    const int L = spec.filter_length();
    const double sx = std::sqrt(model.sigma2_x[idx(node)]);
    const double sz = std::sqrt(model.sigma2_z[idx(node)]);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Sample s;
    s.x.resize(L);
    for (int j = 0; j < L; ++j) s.x(j) = sx * gauss(rng);
    const double z = sz * gauss(rng);
    s.d = s.x.dot(model.optima[idx(spec.cluster_of(node))]) + z;
    return s;
}

Sample gen_localization_sample(const LocalizationSpec& model, const NetworkSpec& spec, int node, Rng& rng) {
    const Point2 p = model.node_positions[idx(node)];
    const Point2 t = model.targets[idx(spec.cluster_of(node))];
    const double dx = t.x - p.x;
    const double dy = t.y - p.y;
    const double range = std::hypot(dx, dy);
    if (range == 0.0) throw ModelError("node " + std::to_string(node) + " coincides with its target");
    const double ux = dx / range;
    const double uy = dy / range;

    std::normal_distribution<double> gauss(0.0, 1.0);
    const double alpha = model.sigma_alpha[idx(node)] * gauss(rng);
    const double beta = model.sigma_beta[idx(node)] * gauss(rng);
    const double v = model.sigma_v[idx(node)] * gauss(rng);

    // u_perp = (-uy, ux)
    Sample s;
    s.x.resize(2);
    s.x(0) = ux - alpha * uy + beta * ux;
    s.x(1) = uy + alpha * ux + beta * uy;
    s.d = range + s.x(0) * p.x + s.x(1) * p.y + v;
    return s;
}

Sample draw_sample(const DataModel& model, const NetworkSpec& spec, int node, Rng& rng) {
    return std::visit(
        [&](const auto& m) -> Sample {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModelSpec>)
                return gen_linear_sample(m, spec, node, rng);
            else
                return gen_localization_sample(m, spec, node, rng);
        },
        model);
}

void check_model(const DataModel& model, const NetworkSpec& spec) {
    std::visit([&](const auto& m) { m.check(spec); }, model);
}

VectorXd stacked_optimum(const DataModel& model, const NetworkSpec& spec) {
    const int L = spec.filter_length();
    VectorXd w(spec.n_nodes() * L);
    for (int k = 0; k < spec.n_nodes(); ++k) {
        const int q = spec.cluster_of(k);
        if (const auto* lin = std::get_if<LinearModelSpec>(&model)) {
            w.segment(k * L, L) = lin->optima[idx(q)];
        } else {
            const auto& loc = std::get<LocalizationSpec>(model);
            w(k * L) = loc.targets[idx(q)].x;
            w(k * L + 1) = loc.targets[idx(q)].y;
        }
    }
    return w;
}

int model_dimension(const DataModel& model) {
    if (const auto* lin = std::get_if<LinearModelSpec>(&model))
        return lin->optima.empty() ? 0 : static_cast<int>(lin->optima.front().size());
    return 2;
}

void dump_streams_csv(std::ostream& out, const DataModel& model, const NetworkSpec& spec, std::uint64_t master_seed,
                      std::uint64_t run, int n_iters) {
    const int L = spec.filter_length();
    out << "iteration,node";
    for (int j = 1; j <= L; ++j) out << ",x_" << j;
    out << ",d\n";
    std::vector<Rng> streams;
    for (int k = 0; k < spec.n_nodes(); ++k)
        streams.push_back(make_stream(master_seed, run, static_cast<std::uint64_t>(k)));
    char buf[64];
    for (int n = 0; n < n_iters; ++n) {
        for (int k = 0; k < spec.n_nodes(); ++k) {
            Sample s = draw_sample(model, spec, k, streams[idx(k)]);
            out << n << ',' << k;
            for (int j = 0; j < L; ++j) {
                std::snprintf(buf, sizeof buf, ",%.17g", s.x(j));
                out << buf;
            }
            std::snprintf(buf, sizeof buf, ",%.17g\n", s.d);
            out << buf;
        }
    }
}

}  // namespace mtdiff
