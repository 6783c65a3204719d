#include "mtdiff/network.hpp"

#include <doctest.h>

using namespace mtdiff;

namespace {

// Path 0-1-2-3, clusters {0,1} and {2,3}; the only inter-cluster link is 1-2.
NetworkSpec path4() { return NetworkSpec(4, 2, {{0, 1}, {1, 2}, {2, 3}}, {0, 0, 1, 1}); }

}  // namespace

TEST_CASE("neighborhoods split by cluster") {
    const auto net = path4();
    CHECK(net.neighbors(1) == std::vector<int>{0, 1, 2});
    CHECK(net.intra_neighbors(1) == std::vector<int>{0, 1});
    CHECK(net.inter_neighbors(1) == std::vector<int>{2});
    CHECK(net.inter_neighbors(0).empty());
    CHECK(net.adjacent(2, 1));
    CHECK_FALSE(net.adjacent(0, 3));
}

TEST_CASE("uniform A and P") {
    const auto net = path4();
    const MatrixXd A = build_uniform_A(net);
    // Node 1's intra neighborhood is {0,1}: column 1 holds 1/2 twice.
    CHECK(A(0, 1) == doctest::Approx(0.5));
    CHECK(A(1, 1) == doctest::Approx(0.5));
    CHECK(A(2, 1) == 0.0);
    for (int k = 0; k < 4; ++k) CHECK(A.col(k).sum() == doctest::Approx(1.0));

    const MatrixXd P = build_uniform_P(net);
    CHECK(P(1, 2) == 1.0);
    CHECK(P(2, 1) == 1.0);
    CHECK(P.row(0).sum() == 0.0);  // no inter-cluster neighbor
    CHECK(P.row(3).sum() == 0.0);
}

TEST_CASE("uniform C is right stochastic within clusters") {
    const auto net = path4();
    const MatrixXd C = build_uniform_C(net);
    for (int k = 0; k < 4; ++k) CHECK(C.row(k).sum() == doctest::Approx(1.0));
    CHECK(C(1, 2) == 0.0);
    CHECK_FALSE(validate(net, build_uniform_A(net), C, build_uniform_P(net), 0.1));
}

TEST_CASE("validate reports the first violation") {
    const auto net = path4();
    const MatrixXd A = build_uniform_A(net), C = build_identity_C(net), P = build_uniform_P(net);
    CHECK_FALSE(validate(net, A, C, P, 1.0));

    SUBCASE("column sum") {
        MatrixXd bad = A;
        bad(0, 0) = 0.9;
        const auto v = validate(net, bad, C, P);
        REQUIRE(v);
        CHECK(v->kind == ViolationKind::NotLeftStochastic);
        CHECK(v->col == 0);
    }
    SUBCASE("A leaks across clusters") {
        MatrixXd bad = A;
        bad(2, 1) = 0.5;
        bad(1, 1) = 0.0;
        const auto v = validate(net, bad, C, P);
        REQUIRE(v);
        CHECK(v->kind == ViolationKind::SupportA);
    }
    SUBCASE("P on a non-edge") {
        MatrixXd bad = P;
        bad(0, 3) = 1.0;
        const auto v = validate(net, A, C, bad);
        REQUIRE(v);
        CHECK(v->kind == ViolationKind::SupportP);
    }
    SUBCASE("negative tau") {
        const auto v = validate(net, A, C, P, -1.0);
        REQUIRE(v);
        CHECK(v->kind == ViolationKind::NegativeTau);
    }
    SUBCASE("dimension") {
        const auto v = validate(net, MatrixXd::Identity(3, 3), C, P);
        REQUIRE(v);
        CHECK(v->kind == ViolationKind::DimensionMismatch);
    }
}

TEST_CASE("constructor rejects broken topologies") {
    CHECK_THROWS_AS(NetworkSpec(3, 1, {{0, 1}}, {0, 0, 0}), NetworkError);
    // Cluster {0,2} is not connected through its own nodes.
    CHECK_THROWS_AS(NetworkSpec(3, 1, {{0, 1}, {1, 2}}, {0, 1, 0}), NetworkError);
    // Cluster label 1 is empty.
    CHECK_THROWS_AS(NetworkSpec(2, 1, {{0, 1}}, {0, 2}), NetworkError);
}

TEST_CASE("single node network") {
    const NetworkSpec net(1, 3, {}, {0});
    CHECK(build_uniform_A(net)(0, 0) == 1.0);
    CHECK(build_uniform_P(net)(0, 0) == 0.0);
    CHECK_FALSE(validate(net, build_uniform_A(net), build_identity_C(net), build_uniform_P(net), 1.0));
}

TEST_CASE("geometric generator is deterministic and valid") {
    Region region;
    region.width = region.height = 10.0;
    const auto a = random_geometric_network(30, region, 3.5, 42, 3);
    const auto b = random_geometric_network(30, region, 3.5, 42, 3);
    CHECK(a == b);
    CHECK(a.to_edge_list() == b.to_edge_list());
    CHECK(a.n_clusters() == 3);
    CHECK_FALSE(validate(a, build_uniform_A(a), build_identity_C(a), build_uniform_P(a), 0.1));

    const auto g = random_geometric_network(30, region, 3.5, 42, 3, 2, 1000, ClusterAssignment::Grow);
    CHECK(g.n_clusters() == 3);
    CHECK_THROWS_AS(random_geometric_network(30, region, 0.01, 1, 1, 2, 5), NetworkError);
}

TEST_CASE("annulus placement stays inside the ring") {
    Region ring;
    ring.shape = Region::Shape::Annulus;
    ring.x0 = 15.0;
    ring.y0 = 10.0;
    ring.inner_radius = 15.0;
    ring.outer_radius = 25.0;
    const auto net = random_geometric_network(40, ring, 11.0, 1, 2);
    REQUIRE(net.positions());
    for (const auto& p : *net.positions()) {
        const double r = std::hypot(p.x - 15.0, p.y - 10.0);
        CHECK(r >= 15.0 - 1e-12);
        CHECK(r <= 25.0 + 1e-12);
    }
}
