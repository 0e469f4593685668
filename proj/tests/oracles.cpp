#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <limits>

#include "mhopsim/rng.hpp"

namespace mhop::testing {

std::vector<NodeId> TestGraph::neighbors(NodeId i) const {
    std::vector<NodeId> out;
    for (NodeId j = 0; j < n; ++j)
        if (j != i && has_edge(i, j)) out.push_back(j);
    return out;
}

TestGraph random_graph(std::size_t n, double edge_prob, std::uint64_t seed, bool with_delay,
                       double zero_quality_prob) {
    Rng rng(seed);
    TestGraph g;
    g.n = n;
    g.edges.resize(n * n);
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            if (rng.uniform01() >= edge_prob) continue;
            const bool dead = rng.uniform01() < zero_quality_prob;
            LinkEstimate ij, ji;
            ij.fd = dead ? 0.0 : rng.uniform(0.3, 1.0);
            ij.rd = dead ? 0.0 : rng.uniform(0.3, 1.0);
            ji.fd = ij.rd;
            ji.rd = ij.fd;
            if (with_delay) {
                ij.delay = rng.uniform(1e-3, 1e-2);
                ji.delay = rng.uniform(1e-3, 1e-2);
            }
            g.edges[i * n + j] = ij;
            g.edges[j * n + i] = ji;
        }
    }
    return g;
}

TestGraph perfect_graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& links,
                        double delay_s) {
    TestGraph g;
    g.n = n;
    g.edges.resize(n * n);
    for (const auto& [i, j] : links) {
        LinkEstimate e;
        e.fd = 1.0;
        e.rd = 1.0;
        e.delay = delay_s;
        g.edges[i * n + j] = e;
        g.edges[j * n + i] = e;
    }
    return g;
}

std::optional<PathCost> best_path_by_enumeration(const TestGraph& graph, NodeId src, NodeId dst,
                                                 MetricKind metric) {
    std::optional<PathCost> best;
    std::vector<char> visited(graph.n, 0);
    std::vector<LinkEstimate> path;

    std::function<void(NodeId)> dfs = [&](NodeId u) {
        if (u == dst) {
            std::optional<PathCost> cost;
            switch (metric) {
            case MetricKind::Etx: cost = etx_path(path); break;
            case MetricKind::InvEtx: cost = invetx_path(path); break;
            case MetricKind::Ml: {
                const PathCost ml = ml_path(path);
                if (ml.value > 0.0) cost = ml; // zero-probability paths are no paths
                break;
            }
            case MetricKind::Md: cost = md_path(path); break;
            }
            if (cost && (!best || better(metric, *cost, *best))) best = cost;
            return;
        }
        for (NodeId v = 0; v < graph.n; ++v) {
            if (visited[v] || v == u || !graph.has_edge(u, v)) continue;
            const LinkEstimate& e = graph.edge(u, v);
            if (!e.usable()) continue;
            if (metric == MetricKind::Md && !e.delay.has_value()) continue;
            visited[v] = 1;
            path.push_back(e);
            dfs(v);
            path.pop_back();
            visited[v] = 0;
        }
    };

    visited[src] = 1;
    dfs(src);
    return best;
}

std::vector<int> bfs_distances(const TestGraph& graph, NodeId src) {
    std::vector<int> dist(graph.n, -1);
    std::vector<NodeId> frontier{src};
    dist[src] = 0;
    while (!frontier.empty()) {
        std::vector<NodeId> next;
        for (NodeId u : frontier) {
            for (NodeId v = 0; v < graph.n; ++v) {
                if (v == u || !graph.has_edge(u, v) || dist[v] >= 0) continue;
                dist[v] = dist[u] + 1;
                next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

RoutingInputs routing_inputs_from_graph(const TestGraph& graph, NodeId self) {
    RoutingInputs in;
    for (NodeId u = 0; u < graph.n; ++u) {
        std::map<NodeId, LinkEstimate> links;
        for (NodeId v = 0; v < graph.n; ++v)
            if (v != u && graph.has_edge(u, v)) links.emplace(v, graph.edge(u, v));
        if (u == self)
            in.local = std::move(links);
        else
            in.table.origins[u] = {1, std::move(links)};
    }
    return in;
}

NeighborState neighbor_state_from_graph(const TestGraph& graph, NodeId u, double window_seconds,
                                        double expected_count) {
    NeighborState state;
    for (NodeId v : graph.neighbors(u)) {
        NeighborInfo info{graph.edge(u, v), HelloWindow(window_seconds, expected_count), 0.0,
                          false};
        state.one_hop.emplace(v, std::move(info));
    }
    for (NodeId v : graph.neighbors(u)) {
        for (NodeId w : graph.neighbors(v)) {
            if (w == u || state.one_hop.count(w)) continue;
            state.two_hop[w][v] = 0.0;
        }
    }
    return state;
}

NeighborState random_neighbor_state(std::size_t universe, std::uint64_t seed,
                                    bool with_stale_entries) {
    Rng rng(seed);
    NeighborState state;
    // ids: 0 is "self" by convention and never appears
    const std::size_t h1_count = 1 + rng.uniform_int(std::max<std::size_t>(universe / 2, 1));
    std::set<NodeId> h1;
    while (h1.size() < h1_count) h1.insert(1 + static_cast<NodeId>(rng.uniform_int(universe)));
    for (NodeId v : h1)
        state.one_hop.emplace(v, NeighborInfo{LinkEstimate{1.0, 1.0, std::nullopt},
                                              HelloWindow(20.0, 10.0), 0.0, false});

    const std::size_t h2_count = rng.uniform_int(universe);
    std::vector<NodeId> h1_vec(h1.begin(), h1.end());
    for (std::size_t k = 0; k < h2_count; ++k) {
        const NodeId w = static_cast<NodeId>(1 + universe + rng.uniform_int(universe));
        if (state.one_hop.count(w)) continue;
        auto& vias = state.two_hop[w];
        const std::size_t cover_count = 1 + rng.uniform_int(h1_vec.size());
        for (std::size_t c = 0; c < cover_count; ++c)
            vias[h1_vec[rng.uniform_int(h1_vec.size())]] = 0.0;
    }
    if (with_stale_entries && rng.uniform01() < 0.5) {
        // an entry only "covered" by a node that is not a 1-hop neighbor
        const NodeId w = static_cast<NodeId>(1 + 3 * universe + rng.uniform_int(universe));
        const NodeId ghost = static_cast<NodeId>(1 + 2 * universe + rng.uniform_int(universe));
        if (!state.one_hop.count(ghost)) state.two_hop[w][ghost] = 0.0;
    }
    return state;
}

bool covers_all_two_hop(const NeighborState& state, const std::set<NodeId>& chosen) {
    for (const auto& [w, vias] : state.two_hop) {
        bool covered = false;
        for (const auto& [via, t] : vias) {
            if (chosen.count(via)) {
                covered = true;
                break;
            }
        }
        if (!covered) return false;
    }
    return true;
}

std::size_t exact_min_mpr_cover(const NeighborState& state) {
    std::vector<NodeId> h1;
    for (const auto& [id, info] : state.one_hop) h1.push_back(id);
    const std::size_t n = h1.size();
    std::size_t best = n + 1;
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        const std::size_t size = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (size >= best) continue;
        std::set<NodeId> chosen;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ull << i)) chosen.insert(h1[i]);
        if (covers_all_two_hop(state, chosen)) best = size;
    }
    return best;
}

double widest_path_by_enumeration(const Topology& topology, NodeId s, NodeId t) {
    double best = 0.0;
    std::vector<char> visited(topology.node_count(), 0);

    std::function<void(NodeId, double)> dfs = [&](NodeId u, double width) {
        if (u == t) {
            best = std::max(best, width);
            return;
        }
        for (const auto& nb : topology.neighbors(u)) {
            if (visited[nb.id]) continue;
            visited[nb.id] = 1;
            dfs(nb.id, std::min(width, nb.capacity));
            visited[nb.id] = 0;
        }
    };
    visited[s] = 1;
    dfs(s, std::numeric_limits<double>::infinity());
    return best;
}

} // namespace mhop::testing
