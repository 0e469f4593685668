#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mhopsim/rng.hpp"
#include "mhopsim/topology.hpp"

using namespace mhop;

TEST_CASE("link_delivery_probability shape") {
    CHECK(link_delivery_probability(0.0, 250.0) == 1.0);
    CHECK(link_delivery_probability(125.0, 250.0) == 1.0);
    CHECK(link_delivery_probability(250.0, 250.0) == 0.0);
    CHECK(link_delivery_probability(400.0, 250.0) == 0.0);
    // midpoint of the decay segment
    CHECK(link_delivery_probability(0.75 * 250.0, 250.0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(link_delivery_probability(-1.0, 250.0), std::invalid_argument);
    CHECK_THROWS_AS(link_delivery_probability(10.0, 0.0), std::invalid_argument);
}

TEST_CASE("link_delivery_probability is monotone and bounded") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double range = rng.uniform(1.0, 500.0);
        double d1 = rng.uniform(0.0, 1.5 * range);
        double d2 = rng.uniform(0.0, 1.5 * range);
        if (d1 > d2) std::swap(d1, d2);
        const double p1 = link_delivery_probability(d1, range);
        const double p2 = link_delivery_probability(d2, range);
        CHECK(p1 >= p2);
        CHECK(p1 >= 0.0);
        CHECK(p1 <= 1.0);
    }
}

TEST_CASE("generate_topology rejects bad arguments") {
    CHECK_THROWS_AS(generate_topology(1, 100, 50, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_topology(10, 0, 50, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_topology(10, 100, -1, 1), std::invalid_argument);
}

TEST_CASE("two nodes in a tiny box always share one link") {
    const Topology topo = generate_topology(2, 10, 100, 1);
    CHECK(topo.node_count() == 2);
    CHECK(topo.link_count() == 1);
    CHECK(topo.has_link(0, 1));
    CHECK(topo.has_link(1, 0));
}

TEST_CASE("generated topology is symmetric and geometrically consistent") {
    const Topology topo = generate_topology(50, 1000, 250, 7);
    CHECK(topo.node_count() == 50);
    CHECK(topo.link_count() > 0);

    for (NodeId i = 0; i < 50; ++i) {
        for (NodeId j = 0; j < 50; ++j) {
            if (i == j) continue;
            const auto& a = topo.position(i);
            const auto& b = topo.position(j);
            const double dist = std::hypot(a.x - b.x, a.y - b.y);
            const auto ij = topo.link(i, j);
            const auto ji = topo.link(j, i);
            CHECK(ij.has_value() == (dist <= 250.0));
            CHECK(ij.has_value() == ji.has_value());
            if (ij) {
                // the stored pair for (j,i) is the swap of (i,j)
                CHECK(ij->fd == ji->rd);
                CHECK(ij->rd == ji->fd);
                CHECK(ij->fd >= 0.0);
                CHECK(ij->fd <= 1.0);
            }
        }
        const auto& p = topo.position(i);
        CHECK(p.x >= 0.0);
        CHECK(p.x <= 1000.0);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= 1000.0);
    }
}

TEST_CASE("equal seeds give byte-identical topologies") {
    const Topology a = generate_topology(50, 1000, 250, 7);
    const Topology b = generate_topology(50, 1000, 250, 7);
    CHECK(a == b);
    CHECK(topology_to_string(a) == topology_to_string(b));

    const Topology c = generate_topology(50, 1000, 250, 8);
    CHECK(topology_to_string(a) != topology_to_string(c));
}

TEST_CASE("connectivity_check") {
    SUBCASE("two nodes, one link") {
        const Topology topo = generate_topology(2, 10, 100, 1);
        CHECK(connectivity_check(topo));
    }
    SUBCASE("three nodes, no links") {
        Topology topo(1000, 1, {{0, 0}, {500, 500}, {900, 900}});
        CHECK_FALSE(connectivity_check(topo));
    }
    SUBCASE("generated 50-node topology agrees with an independent reachability sweep") {
        const Topology topo = generate_topology(50, 1000, 250, 7);
        // oracle: iterate closure over the link matrix
        std::vector<char> reach(topo.node_count(), 0);
        reach[0] = 1;
        bool grew = true;
        while (grew) {
            grew = false;
            for (NodeId i = 0; i < topo.node_count(); ++i) {
                if (!reach[i]) continue;
                for (NodeId j = 0; j < topo.node_count(); ++j) {
                    if (!reach[j] && topo.has_link(i, j)) {
                        reach[j] = 1;
                        grew = true;
                    }
                }
            }
        }
        bool all = true;
        for (char r : reach) all = all && r;
        CHECK(connectivity_check(topo) == all);
    }
}

TEST_CASE("generate_connected_topology reports the seed it used") {
    const auto result = generate_connected_topology(10, 1000, 250, 42);
    CHECK(connectivity_check(result.topology));
    CHECK(result.used_seed >= 42);
    // the reported seed regenerates the same topology
    const Topology again = generate_topology(10, 1000, 250, result.used_seed);
    CHECK(again == result.topology);
}

TEST_CASE("topology serialization round-trips") {
    const Topology topo = generate_topology(20, 500, 200, 3);
    std::stringstream stream;
    save_topology(topo, stream);
    const Topology loaded = load_topology(stream);
    CHECK(loaded == topo);
    CHECK(topology_to_string(loaded) == topology_to_string(topo));
}

TEST_CASE("add_link rejects malformed links") {
    Topology topo(100, 50, {{0, 0}, {10, 0}});
    topo.add_link(0, 1, 0.9, 0.8, 100);
    CHECK_THROWS_AS(topo.add_link(0, 0, 1, 1, 100), std::invalid_argument);
    CHECK_THROWS_AS(topo.add_link(0, 1, 1, 1, 100), std::invalid_argument);
    CHECK_THROWS_AS(topo.add_link(0, 5, 1, 1, 100), std::invalid_argument);
}
