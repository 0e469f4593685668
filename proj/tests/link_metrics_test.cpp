#include <doctest.h>

#include <vector>

#include "mhopsim/link_metrics.hpp"
#include "mhopsim/rng.hpp"

#include "oracles.hpp"

using namespace mhop;

namespace {

LinkEstimate link(double fd, double rd) { return LinkEstimate{fd, rd, std::nullopt}; }

LinkEstimate delayed(double delay_s) { return LinkEstimate{1.0, 1.0, delay_s}; }

} // namespace

TEST_CASE("delivery_ratio over the sliding window") {
    HelloWindow w(20.0, 10.0);
    SUBCASE("full window") {
        for (int i = 0; i < 10; ++i) w.record(2.0 * i); // 0..18
        CHECK(delivery_ratio(w, 19.0) == 1.0);
    }
    SUBCASE("no receipts") {
        CHECK(delivery_ratio(w, 100.0) == 0.0);
    }
    SUBCASE("half the expected count") {
        for (int i = 0; i < 5; ++i) w.record(2.0 * i);
        CHECK(delivery_ratio(w, 9.0) == 0.5);
    }
    SUBCASE("old receipts age out") {
        for (int i = 0; i < 10; ++i) w.record(2.0 * i);
        CHECK(delivery_ratio(w, 19.0) == 1.0);
        CHECK(delivery_ratio(w, 30.0) == doctest::Approx(0.5)); // only 10..18 remain
        CHECK(delivery_ratio(w, 100.0) == 0.0);
    }
    SUBCASE("ratio clamps at 1") {
        for (int i = 0; i < 12; ++i) w.record(1.5 * i); // bunched emissions
        CHECK(delivery_ratio(w, 17.0) == 1.0);
    }
    SUBCASE("zero expected count is rejected") {
        HelloWindow bad;
        CHECK_THROWS_AS(delivery_ratio(bad, 1.0), std::invalid_argument);
    }
}

TEST_CASE("delivery_ratio is translation invariant") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        HelloWindow a(20.0, 10.0), b(20.0, 10.0);
        const double shift = rng.uniform(0.0, 1e4);
        double t = 0.0;
        const int receipts = static_cast<int>(rng.uniform_int(15));
        for (int i = 0; i < receipts; ++i) {
            t += rng.uniform(0.1, 4.0);
            a.record(t);
            b.record(t + shift);
        }
        const double now = t + rng.uniform(0.0, 25.0);
        CHECK(delivery_ratio(a, now) == delivery_ratio(b, now + shift));
    }
}

TEST_CASE("window receipts must not decrease") {
    HelloWindow w(20.0, 10.0);
    w.record(5.0);
    CHECK_THROWS_AS(w.record(4.0), std::invalid_argument);
}

TEST_CASE("etx_path") {
    SUBCASE("three perfect links") {
        std::vector<LinkEstimate> links{link(1, 1), link(1, 1), link(1, 1)};
        const auto cost = etx_path(links);
        REQUIRE(cost.has_value());
        CHECK(cost->value == 3.0);
        CHECK(cost->hops == 3);
    }
    SUBCASE("single lossy link") {
        std::vector<LinkEstimate> links{link(0.5, 0.8)};
        CHECK(etx_path(links)->value == doctest::Approx(2.5).epsilon(1e-12));
    }
    SUBCASE("two mixed links") {
        std::vector<LinkEstimate> links{link(0.9, 0.9), link(0.8, 1.0)};
        CHECK(etx_path(links)->value ==
              doctest::Approx(1.0 / 0.81 + 1.0 / 0.8).epsilon(1e-12));
    }
    SUBCASE("unusable link invalidates the path") {
        std::vector<LinkEstimate> links{link(1, 1), link(0, 0.9)};
        CHECK_FALSE(etx_path(links).has_value());
    }
}

TEST_CASE("invetx_path") {
    SUBCASE("three perfect links") {
        std::vector<LinkEstimate> links{link(1, 1), link(1, 1), link(1, 1)};
        CHECK(invetx_path(links)->value == 3.0);
    }
    SUBCASE("two lossy links") {
        std::vector<LinkEstimate> links{link(0.9, 0.9), link(0.8, 1.0)};
        CHECK(invetx_path(links)->value == doctest::Approx(1.61).epsilon(1e-12));
    }
    SUBCASE("empty path") {
        const auto cost = invetx_path({});
        REQUIRE(cost.has_value());
        CHECK(cost->value == 0.0);
        CHECK(cost->hops == 0);
    }
    SUBCASE("unusable link invalidates the path") {
        std::vector<LinkEstimate> links{link(0.9, 0.0)};
        CHECK_FALSE(invetx_path(links).has_value());
    }
}

TEST_CASE("ml_path") {
    SUBCASE("perfect path of any length") {
        std::vector<LinkEstimate> links(7, link(1, 1));
        CHECK(ml_path(links).value == 1.0);
    }
    SUBCASE("two links") {
        std::vector<LinkEstimate> links{link(0.9, 0.9), link(0.9, 0.9)};
        CHECK(ml_path(links).value == doctest::Approx(0.6561).epsilon(1e-12));
    }
    SUBCASE("zero-quality link absorbs") {
        std::vector<LinkEstimate> links{link(1, 1), link(0, 1), link(1, 1)};
        CHECK(ml_path(links).value == 0.0);
    }
}

TEST_CASE("md_path") {
    SUBCASE("zero delays") {
        std::vector<LinkEstimate> links{delayed(0), delayed(0)};
        CHECK(md_path(links)->value == 0.0);
    }
    SUBCASE("sums per-link delays") {
        std::vector<LinkEstimate> links{delayed(5e-3), delayed(7e-3)};
        CHECK(md_path(links)->value == doctest::Approx(12e-3).epsilon(1e-12));
    }
    SUBCASE("single probe sample") {
        std::vector<LinkEstimate> links{delayed(3e-3)};
        CHECK(md_path(links)->value == doctest::Approx(3e-3).epsilon(1e-12));
    }
    SUBCASE("missing sample invalidates the path") {
        std::vector<LinkEstimate> links{delayed(1e-3), link(1, 1)};
        CHECK_FALSE(md_path(links).has_value());
    }
}

TEST_CASE("update_delay_estimate") {
    CHECK(update_delay_estimate(std::nullopt, 4e-3) == 4e-3);
    CHECK(update_delay_estimate(4e-3, 4e-3) == doctest::Approx(4e-3).epsilon(1e-15));
    CHECK(update_delay_estimate(10e-3, 0.0) == doctest::Approx(7e-3).epsilon(1e-12));
    CHECK_THROWS_AS(update_delay_estimate(1e-3, -1e-3), std::invalid_argument);

    // output always lies between min and max of (current, sample)
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        const double current = rng.uniform(0.0, 1.0);
        const double sample = rng.uniform(0.0, 1.0);
        const double next = update_delay_estimate(current, sample);
        CHECK(next >= std::min(current, sample));
        CHECK(next <= std::max(current, sample));
    }
}

TEST_CASE("better orderings") {
    auto cost = [](MetricKind kind, double value, unsigned hops) {
        return PathCost{kind, value, hops};
    };
    SUBCASE("etx prefers smaller values") {
        CHECK(better(MetricKind::Etx, cost(MetricKind::Etx, 2.5, 2),
                     cost(MetricKind::Etx, 3.0, 2)));
        CHECK_FALSE(better(MetricKind::Etx, cost(MetricKind::Etx, 3.0, 2),
                           cost(MetricKind::Etx, 2.5, 2)));
    }
    SUBCASE("ml prefers larger values") {
        CHECK(better(MetricKind::Ml, cost(MetricKind::Ml, 0.9, 1),
                     cost(MetricKind::Ml, 0.81, 1)));
    }
    SUBCASE("invetx prefers fewer hops before larger sums") {
        CHECK(better(MetricKind::InvEtx, cost(MetricKind::InvEtx, 1.61, 2),
                     cost(MetricKind::InvEtx, 2.4, 3)));
        CHECK(better(MetricKind::InvEtx, cost(MetricKind::InvEtx, 1.7, 2),
                     cost(MetricKind::InvEtx, 1.61, 2)));
    }
    SUBCASE("md prefers smaller delays") {
        CHECK(better(MetricKind::Md, cost(MetricKind::Md, 5e-3, 2),
                     cost(MetricKind::Md, 12e-3, 2)));
    }
    SUBCASE("equal values fall back to fewer hops") {
        CHECK(better(MetricKind::Ml, cost(MetricKind::Ml, 1.0, 2),
                     cost(MetricKind::Ml, 1.0, 3)));
        CHECK(better(MetricKind::Etx, cost(MetricKind::Etx, 4.0, 3),
                     cost(MetricKind::Etx, 4.0, 4)));
    }
    SUBCASE("mixed kinds are rejected") {
        CHECK_THROWS_AS(better(MetricKind::Etx, cost(MetricKind::Etx, 1, 1),
                               cost(MetricKind::Ml, 1, 1)),
                        std::invalid_argument);
    }
}

TEST_CASE("path formula invariants over random links") {
    Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t len = 1 + rng.uniform_int(6);
        std::vector<LinkEstimate> links;
        bool all_perfect = true;
        for (std::size_t i = 0; i < len; ++i) {
            const bool perfect = rng.uniform01() < 0.3;
            const double fd = perfect ? 1.0 : rng.uniform(0.1, 1.0);
            const double rd = perfect ? 1.0 : rng.uniform(0.1, 1.0);
            all_perfect = all_perfect && fd * rd == 1.0;
            links.push_back(link(fd, rd));
        }
        const auto etx = etx_path(links);
        const auto inv = invetx_path(links);
        const auto ml = ml_path(links);
        REQUIRE(etx.has_value());
        REQUIRE(inv.has_value());

        // etx >= hops with equality iff all links perfect
        CHECK(etx->value >= double(len));
        CHECK((etx->value == double(len)) == all_perfect);
        // invetx == hops iff all links perfect
        CHECK((inv->value == double(len)) == all_perfect);
        // ml in [0,1], monotone under extension
        CHECK(ml.value >= 0.0);
        CHECK(ml.value <= 1.0);
        auto extended = links;
        extended.push_back(link(rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)));
        CHECK(ml_path(extended).value <= ml.value);
    }
}

TEST_CASE("on perfect-link graphs every metric ordering reduces to hop count") {
    using namespace mhop::testing;
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 4 + rng.uniform_int(5); // up to 8 nodes
        std::vector<std::pair<NodeId, NodeId>> links;
        for (NodeId i = 0; i < n; ++i)
            for (NodeId j = i + 1; j < n; ++j)
                if (rng.uniform01() < 0.45) links.emplace_back(i, j);
        const TestGraph g = perfect_graph(n, links);
        const auto hops = bfs_distances(g, 0);
        for (NodeId dst = 1; dst < n; ++dst) {
            for (const MetricKind kind :
                 {MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml, MetricKind::Md}) {
                const auto best = best_path_by_enumeration(g, 0, dst, kind);
                CHECK(best.has_value() == (hops[dst] >= 0));
                if (best) CHECK(best->hops == static_cast<unsigned>(hops[dst]));
            }
        }
    }
}
