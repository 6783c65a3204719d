#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mtdiff {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Thrown when a network description violates a structural invariant.
class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Fixed, undirected, connected network partitioned into connected clusters.
///
/// Nodes and clusters are 0-based. Every neighborhood contains the node
/// itself, neighborhoods are sorted ascending. Immutable after construction.
class NetworkSpec {
public:
    /// Single node, L = 1.
    NetworkSpec() : NetworkSpec(1, 1, {}, {0}) {}

    /// Builds the spec from an undirected edge list. Self-loops in `edges`
    /// are ignored; duplicates are merged. Throws NetworkError when the graph
    /// is disconnected, a cluster is empty or a cluster subgraph is not
    /// connected.
    NetworkSpec(int n_nodes, int filter_length,
                const std::vector<std::pair<int, int>>& edges,
                std::vector<int> clusters,
                std::optional<std::vector<Point2>> positions = std::nullopt);

    int n_nodes() const { return n_nodes_; }
    int filter_length() const { return filter_length_; }
    int n_clusters() const { return n_clusters_; }
    int cluster_of(int k) const { return clusters_[static_cast<std::size_t>(k)]; }
    const std::vector<int>& clusters() const { return clusters_; }

    /// N_k, including k.
    const std::vector<int>& neighbors(int k) const { return neighbors_[static_cast<std::size_t>(k)]; }
    /// N_k ∩ C(k), including k.
    const std::vector<int>& intra_neighbors(int k) const { return intra_[static_cast<std::size_t>(k)]; }
    /// N_k \ C(k).
    const std::vector<int>& inter_neighbors(int k) const { return inter_[static_cast<std::size_t>(k)]; }

    bool adjacent(int k, int l) const;
    bool same_cluster(int k, int l) const { return cluster_of(k) == cluster_of(l); }

    /// Undirected edges (k < l), sorted.
    std::vector<std::pair<int, int>> edges() const;

    const std::optional<std::vector<Point2>>& positions() const { return positions_; }

    /// Same graph, every node its own cluster.
    NetworkSpec with_singleton_clusters() const;
    /// Same graph, one cluster covering the whole network.
    NetworkSpec with_single_cluster() const;

    /// "k l" per line (0-based) followed by a "clusters c0 c1 ..." line.
    std::string to_edge_list() const;

    bool operator==(const NetworkSpec& other) const;

private:
    int n_nodes_;
    int filter_length_;
    int n_clusters_ = 0;
    std::vector<int> clusters_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> intra_;
    std::vector<std::vector<int>> inter_;
    std::optional<std::vector<Point2>> positions_;
};

/// a_lk = 1/|N_k ∩ C(k)| on the intra-cluster neighborhood, else 0.
MatrixXd build_uniform_A(const NetworkSpec& spec);

/// rho_kl = 1/|N_k \ C(k)| on inter-cluster links; all-zero row when the
/// node has no inter-cluster neighbor.
MatrixXd build_uniform_P(const NetworkSpec& spec);

/// I_N, a valid measurement-diffusion matrix for any clustering.
MatrixXd build_identity_C(const NetworkSpec& spec);

/// c_lk = 1/|N_l ∩ C(l)| for k in N_l ∩ C(l): each node shares its data
/// uniformly with its intra-cluster neighborhood.
MatrixXd build_uniform_C(const NetworkSpec& spec);

enum class ViolationKind {
    DimensionMismatch,
    NegativeEntry,
    NotLeftStochastic,
    NotRightStochastic,
    SupportA,
    SupportC,
    SupportP,
    NegativeTau,
    DisconnectedCluster,
};

struct Violation {
    ViolationKind kind;
    int row = -1;
    int col = -1;
    std::string message;
};

/// Checks the combination, measurement and regularization matrices against
/// the network. Returns the first violated invariant, or nullopt when all
/// hold. Stochasticity is checked to within `tol`.
std::optional<Violation> validate(const NetworkSpec& spec, const MatrixXd& A, const MatrixXd& C,
                                  const MatrixXd& P, double tau = 0.0, double tol = 1e-9);

/// Placement region for geometric networks.
struct Region {
    enum class Shape { Rectangle, Annulus };
    Shape shape = Shape::Rectangle;
    // Rectangle: [x0, x0 + width] x [y0, y0 + height].
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 1.0;
    double height = 1.0;
    // Annulus around (x0, y0) with radii in [inner_radius, outer_radius].
    double inner_radius = 0.0;
    double outer_radius = 1.0;
};

enum class ClusterAssignment {
    /// Every node picks a cluster uniformly at random; the draw is repeated
    /// until each cluster is non-empty and induces a connected subgraph.
    Random,
    /// Clusters grow from random seed nodes by randomized expansion along
    /// edges; always connected, spatially contiguous.
    Grow,
};

/// Uniform node placement in `region`, edges between nodes closer than
/// `radius`. Placement is redrawn up to `max_attempts` times until the graph
/// is connected (and, for random assignment, until a connected clustering is
/// found), then NetworkError is thrown.
NetworkSpec random_geometric_network(int n_nodes, const Region& region, double radius,
                                     std::uint64_t seed, int n_clusters = 1,
                                     int filter_length = 2, int max_attempts = 1000,
                                     ClusterAssignment assignment = ClusterAssignment::Random);

}  // namespace mtdiff
