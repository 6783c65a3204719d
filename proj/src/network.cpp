#include "mtdiff/network.hpp"
#include "mtdiff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace mtdiff {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Connectivity of the subgraph induced by `members` (non-empty).
bool induced_connected(const std::vector<std::vector<int>>& adj, const std::vector<int>& members,
                       const std::vector<char>& in_set) {
    if (members.empty()) return true;
    std::vector<char> seen(adj.size(), 0);
    std::queue<int> frontier;
    frontier.push(members.front());
    seen[idx(members.front())] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        int k = frontier.front();
        frontier.pop();
        for (int l : adj[idx(k)]) {
            if (!in_set[idx(l)] || seen[idx(l)]) continue;
            seen[idx(l)] = 1;
            ++reached;
            frontier.push(l);
        }
    }
    return reached == members.size();
}

std::vector<std::vector<int>> cluster_members(const std::vector<int>& clusters, int n_clusters) {
    std::vector<std::vector<int>> members(idx(n_clusters));
    for (std::size_t k = 0; k < clusters.size(); ++k) members[idx(clusters[k])].push_back(static_cast<int>(k));
    return members;
}

}  // namespace

NetworkSpec::NetworkSpec(int n_nodes, int filter_length, const std::vector<std::pair<int, int>>& edges,
                         std::vector<int> clusters, std::optional<std::vector<Point2>> positions)
    : n_nodes_(n_nodes), filter_length_(filter_length), clusters_(std::move(clusters)),
      positions_(std::move(positions)) {
    if (n_nodes_ < 1) throw NetworkError("network needs at least one node");
    if (filter_length_ < 1) throw NetworkError("filter length must be positive");
    if (clusters_.size() != idx(n_nodes_))
        throw NetworkError("cluster assignment has " + std::to_string(clusters_.size()) +
                           " entries, expected " + std::to_string(n_nodes_));
    if (positions_ && positions_->size() != idx(n_nodes_))
        throw NetworkError("position list does not match node count");

    for (int c : clusters_) {
        if (c < 0) throw NetworkError("negative cluster index");
        n_clusters_ = std::max(n_clusters_, c + 1);
    }

    std::vector<std::set<int>> adj(idx(n_nodes_));
    for (auto [k, l] : edges) {
        if (k < 0 || l < 0 || k >= n_nodes_ || l >= n_nodes_)
            throw NetworkError("edge (" + std::to_string(k) + ", " + std::to_string(l) + ") out of range");
        if (k == l) continue;
        adj[idx(k)].insert(l);
        adj[idx(l)].insert(k);
    }

    neighbors_.resize(idx(n_nodes_));
    intra_.resize(idx(n_nodes_));
    inter_.resize(idx(n_nodes_));
    std::vector<std::vector<int>> open_adj(idx(n_nodes_));
    for (int k = 0; k < n_nodes_; ++k) {
        auto nb = adj[idx(k)];
        open_adj[idx(k)].assign(nb.begin(), nb.end());
        nb.insert(k);
        neighbors_[idx(k)].assign(nb.begin(), nb.end());
        for (int l : neighbors_[idx(k)]) {
            if (same_cluster(k, l))
                intra_[idx(k)].push_back(l);
            else
                inter_[idx(k)].push_back(l);
        }
    }

    std::vector<char> everyone(idx(n_nodes_), 1);
    std::vector<int> all(idx(n_nodes_));
    for (int k = 0; k < n_nodes_; ++k) all[idx(k)] = k;
    if (!induced_connected(open_adj, all, everyone)) throw NetworkError("network graph is not connected");

    auto members = cluster_members(clusters_, n_clusters_);
    for (int q = 0; q < n_clusters_; ++q) {
        const auto& m = members[idx(q)];
        if (m.empty()) throw NetworkError("cluster " + std::to_string(q) + " is empty");
        std::vector<char> in_set(idx(n_nodes_), 0);
        for (int k : m) in_set[idx(k)] = 1;
        if (!induced_connected(open_adj, m, in_set))
            throw NetworkError("cluster " + std::to_string(q) + " is not connected");
    }
}

bool NetworkSpec::adjacent(int k, int l) const {
    const auto& nb = neighbors(k);
    return std::binary_search(nb.begin(), nb.end(), l);
}

std::vector<std::pair<int, int>> NetworkSpec::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < n_nodes_; ++k)
        for (int l : neighbors(k))
            if (l > k) out.emplace_back(k, l);
    return out;
}

NetworkSpec NetworkSpec::with_singleton_clusters() const {
    std::vector<int> c(idx(n_nodes_));
    for (int k = 0; k < n_nodes_; ++k) c[idx(k)] = k;
    return NetworkSpec(n_nodes_, filter_length_, edges(), std::move(c), positions_);
}

NetworkSpec NetworkSpec::with_single_cluster() const {
    return NetworkSpec(n_nodes_, filter_length_, edges(), std::vector<int>(idx(n_nodes_), 0), positions_);
}

std::string NetworkSpec::to_edge_list() const {
    std::ostringstream os;
    for (auto [k, l] : edges()) os << k << ' ' << l << '\n';
    os << "clusters";
    for (int c : clusters_) os << ' ' << c;
    os << '\n';
    return os.str();
}

bool NetworkSpec::operator==(const NetworkSpec& other) const {
    if (n_nodes_ != other.n_nodes_ || filter_length_ != other.filter_length_ ||
        clusters_ != other.clusters_ || neighbors_ != other.neighbors_)
        return false;
    if (positions_.has_value() != other.positions_.has_value()) return false;
    if (!positions_) return true;
    for (std::size_t i = 0; i < positions_->size(); ++i) {
        if ((*positions_)[i].x != (*other.positions_)[i].x || (*positions_)[i].y != (*other.positions_)[i].y)
            return false;
    }
    return true;
}

MatrixXd build_uniform_A(const NetworkSpec& spec) {
    const int n = spec.n_nodes();
    MatrixXd A = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const auto& nb = spec.intra_neighbors(k);
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int l : nb) A(l, k) = w;
    }
    return A;
}

MatrixXd build_uniform_P(const NetworkSpec& spec) {
    const int n = spec.n_nodes();
    MatrixXd P = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const auto& nb = spec.inter_neighbors(k);
        if (nb.empty()) continue;
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int l : nb) P(k, l) = w;
    }
    return P;
}

MatrixXd build_identity_C(const NetworkSpec& spec) {
    return MatrixXd::Identity(spec.n_nodes(), spec.n_nodes());
}

MatrixXd build_uniform_C(const NetworkSpec& spec) {
    const int n = spec.n_nodes();
    MatrixXd C = MatrixXd::Zero(n, n);
    for (int l = 0; l < n; ++l) {
        const auto& nb = spec.intra_neighbors(l);
        const double w = 1.0 / static_cast<double>(nb.size());
        for (int k : nb) C(l, k) = w;
    }
    return C;
}

std::optional<Violation> validate(const NetworkSpec& spec, const MatrixXd& A, const MatrixXd& C,
                                  const MatrixXd& P, double tau, double tol) {
    const int n = spec.n_nodes();
    auto make = [](ViolationKind kind, int row, int col, std::string msg) {
        return Violation{kind, row, col, std::move(msg)};
    };
    for (const auto* m : {&A, &C, &P}) {
        if (m->rows() != n || m->cols() != n)
            return make(ViolationKind::DimensionMismatch, -1, -1,
                        "matrix is " + std::to_string(m->rows()) + "x" + std::to_string(m->cols()) +
                            ", expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (tau < 0.0) return make(ViolationKind::NegativeTau, -1, -1, "regularization strength tau is negative");

    const char* names[] = {"A", "C", "P"};
    const MatrixXd* mats[] = {&A, &C, &P};
    for (int m = 0; m < 3; ++m) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!((*mats[m])(i, j) >= 0.0))
                    return make(ViolationKind::NegativeEntry, i, j,
                                std::string(names[m]) + "(" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") is negative or not finite");
    }

    for (int k = 0; k < n; ++k) {
        const double s = A.col(k).sum();
        if (std::abs(s - 1.0) > tol)
            return make(ViolationKind::NotLeftStochastic, -1, k,
                        "column " + std::to_string(k) + " of A not stochastic (sums to " + std::to_string(s) + ")");
    }
    for (int l = 0; l < n; ++l) {
        const double s = C.row(l).sum();
        if (std::abs(s - 1.0) > tol)
            return make(ViolationKind::NotRightStochastic, l, -1,
                        "row " + std::to_string(l) + " of C not stochastic (sums to " + std::to_string(s) + ")");
    }

    for (int l = 0; l < n; ++l) {
        for (int k = 0; k < n; ++k) {
            const bool intra = spec.adjacent(k, l) && spec.same_cluster(k, l);
            if (A(l, k) != 0.0 && !intra)
                return make(ViolationKind::SupportA, l, k,
                            "a(" + std::to_string(l) + ", " + std::to_string(k) +
                                ") is nonzero outside the intra-cluster neighborhood of node " + std::to_string(k));
            if (C(l, k) != 0.0 && !intra)
                return make(ViolationKind::SupportC, l, k,
                            "c(" + std::to_string(l) + ", " + std::to_string(k) +
                                ") is nonzero but node " + std::to_string(k) +
                                " is not an intra-cluster neighbor of " + std::to_string(l));
        }
    }
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            const bool inter = spec.adjacent(k, l) && !spec.same_cluster(k, l);
            if (P(k, l) != 0.0 && !inter)
                return make(ViolationKind::SupportP, k, l,
                            "rho(" + std::to_string(k) + ", " + std::to_string(l) +
                                ") is nonzero outside the inter-cluster neighborhood");
        }
    }

    // Clusters are checked at construction; re-verified here so reports built
    // from foreign specs stay complete.
    std::vector<std::vector<int>> open_adj(idx(n));
    for (int k = 0; k < n; ++k)
        for (int l : spec.neighbors(k))
            if (l != k) open_adj[idx(k)].push_back(l);
    auto members = cluster_members(spec.clusters(), spec.n_clusters());
    for (int q = 0; q < spec.n_clusters(); ++q) {
        std::vector<char> in_set(idx(n), 0);
        for (int k : members[idx(q)]) in_set[idx(k)] = 1;
        if (!induced_connected(open_adj, members[idx(q)], in_set))
            return make(ViolationKind::DisconnectedCluster, q, -1, "cluster " + std::to_string(q) + " is not connected");
    }
    return std::nullopt;
}

namespace {

Point2 draw_point(const Region& region, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (region.shape == Region::Shape::Rectangle) {
        const double u = unit(rng);
        const double v = unit(rng);
        return {region.x0 + u * region.width, region.y0 + v * region.height};
    }
    // Uniform in area: radius^2 uniform between the squared radii.
    const double a2 = region.inner_radius * region.inner_radius;
    const double b2 = region.outer_radius * region.outer_radius;
    const double rad = std::sqrt(a2 + unit(rng) * (b2 - a2));
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return {region.x0 + rad * std::cos(phi), region.y0 + rad * std::sin(phi)};
}

bool graph_connected(int n, const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> adj(idx(n));
    for (auto [k, l] : edges) {
        adj[idx(k)].push_back(l);
        adj[idx(l)].push_back(k);
    }
    std::vector<int> all(idx(n));
    for (int k = 0; k < n; ++k) all[idx(k)] = k;
    return induced_connected(adj, all, std::vector<char>(idx(n), 1));
}

// Randomized region growing: every node joins the cluster of a random
// already-assigned neighbor, so each cluster stays connected.
std::vector<int> grow_clusters(int n, const std::vector<std::pair<int, int>>& edges, int n_clusters, Rng& rng) {
    std::vector<std::vector<int>> adj(idx(n));
    for (auto [k, l] : edges) {
        adj[idx(k)].push_back(l);
        adj[idx(l)].push_back(k);
    }
    std::vector<int> order(idx(n));
    for (int k = 0; k < n; ++k) order[idx(k)] = k;
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> label(idx(n), -1);
    std::vector<int> frontier;
    for (int q = 0; q < n_clusters; ++q) {
        label[idx(order[idx(q)])] = q;
        frontier.push_back(order[idx(q)]);
    }
    // Boundary edges from assigned to unassigned nodes; one is picked uniformly.
    std::vector<std::pair<int, int>> boundary;
    auto push_boundary = [&](int k) {
        for (int l : adj[idx(k)])
            if (label[idx(l)] < 0) boundary.emplace_back(k, l);
    };
    for (int k : frontier) push_boundary(k);
    int assigned = n_clusters;
    while (assigned < n) {
        std::uniform_int_distribution<std::size_t> pick(0, boundary.size() - 1);
        const std::size_t i = pick(rng);
        auto [from, to] = boundary[i];
        boundary[i] = boundary.back();
        boundary.pop_back();
        if (label[idx(to)] >= 0) continue;
        label[idx(to)] = label[idx(from)];
        ++assigned;
        push_boundary(to);
    }
    return label;
}

// Uniform independent labels; nullopt when no draw out of `tries` gives
// non-empty connected clusters.
std::optional<std::vector<int>> random_clusters(int n, const std::vector<std::pair<int, int>>& edges, int n_clusters,
                                                Rng& rng, int tries) {
    std::vector<std::vector<int>> adj(idx(n));
    for (auto [k, l] : edges) {
        adj[idx(k)].push_back(l);
        adj[idx(l)].push_back(k);
    }
    std::uniform_int_distribution<int> pick(0, n_clusters - 1);
    for (int t = 0; t < tries; ++t) {
        std::vector<int> label(idx(n));
        for (auto& c : label) c = pick(rng);
        auto members = cluster_members(label, n_clusters);
        bool ok = true;
        for (int q = 0; q < n_clusters && ok; ++q) {
            const auto& m = members[idx(q)];
            std::vector<char> in_set(idx(n), 0);
            for (int k : m) in_set[idx(k)] = 1;
            ok = !m.empty() && induced_connected(adj, m, in_set);
        }
        if (ok) return label;
    }
    return std::nullopt;
}

}  // namespace

NetworkSpec random_geometric_network(int n_nodes, const Region& region, double radius, std::uint64_t seed,
                                     int n_clusters, int filter_length, int max_attempts,
                                     ClusterAssignment assignment) {
    if (n_nodes < 1) throw NetworkError("network needs at least one node");
    if (n_clusters < 1 || n_clusters > n_nodes) throw NetworkError("cluster count must be in [1, n_nodes]");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(attempt), 0, StreamTag::Topology);
        std::vector<Point2> pos(idx(n_nodes));
        for (auto& p : pos) p = draw_point(region, rng);
        std::vector<std::pair<int, int>> edges;
        const double r2 = radius * radius;
        for (int k = 0; k < n_nodes; ++k) {
            for (int l = k + 1; l < n_nodes; ++l) {
                const double dx = pos[idx(k)].x - pos[idx(l)].x;
                const double dy = pos[idx(k)].y - pos[idx(l)].y;
                if (dx * dx + dy * dy <= r2) edges.emplace_back(k, l);
            }
        }
        if (!graph_connected(n_nodes, edges)) continue;
        Rng crng = make_stream(seed, static_cast<std::uint64_t>(attempt), 0, StreamTag::Clustering);
        std::vector<int> clusters;
        if (assignment == ClusterAssignment::Grow) {
            clusters = grow_clusters(n_nodes, edges, n_clusters, crng);
        } else {
            auto drawn = random_clusters(n_nodes, edges, n_clusters, crng, 1000);
            if (!drawn) continue;
            clusters = std::move(*drawn);
        }
        return NetworkSpec(n_nodes, filter_length, edges, std::move(clusters), std::move(pos));
    }
    throw NetworkError("no connected geometric network with connected clusters after " +
                       std::to_string(max_attempts) + " attempts; increase the radius");
}

}  // namespace mtdiff
