#pragma once

// Test-only brute-force oracles. These deliberately avoid the library's
// search algorithms: path costs come from exhaustive simple-path
// enumeration, MPR covers from subset enumeration, reachability from a
// straight BFS.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mhopsim/link_metrics.hpp"
#include "mhopsim/olsr.hpp"
#include "mhopsim/topology.hpp"

namespace mhop::testing {

/// Dense directed-edge graph for oracle tests. Edges come in symmetric
/// pairs (i->j and j->i) with independently drawn qualities.
struct TestGraph {
    std::size_t n = 0;
    std::vector<std::optional<LinkEstimate>> edges; // n*n, row-major i->j

    bool has_edge(NodeId i, NodeId j) const { return edges[i * n + j].has_value(); }
    const LinkEstimate& edge(NodeId i, NodeId j) const { return *edges[i * n + j]; }
    std::vector<NodeId> neighbors(NodeId i) const;
};

/// Random symmetric graph. Qualities are uniform in [0.3, 1] per direction;
/// a fraction of links is forced to zero quality to exercise exclusion.
/// Delays, when requested, are uniform in [1, 10] ms per direction.
TestGraph random_graph(std::size_t n, double edge_prob, std::uint64_t seed, bool with_delay,
                       double zero_quality_prob = 0.0);

/// All-perfect-link graph (fd = rd = 1, delay = delay_s) over the given
/// undirected edge list.
TestGraph perfect_graph(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& links,
                        double delay_s = 1e-3);

/// Best reachable cost from src to dst by exhaustive enumeration of simple
/// paths, under the metric's own ordering.
std::optional<PathCost> best_path_by_enumeration(const TestGraph& graph, NodeId src, NodeId dst,
                                                 MetricKind metric);

/// BFS hop distances from src; -1 where unreachable.
std::vector<int> bfs_distances(const TestGraph& graph, NodeId src);

/// Inputs for compute_routing_table carrying the full link state of the
/// graph: every node advertises all its outgoing edges.
struct RoutingInputs {
    std::map<NodeId, LinkEstimate> local;
    TopologyTable table;
};
RoutingInputs routing_inputs_from_graph(const TestGraph& graph, NodeId self);

/// Neighborhood view of node u in the graph: 1-hop neighbors and the
/// 2-hop-with-covers map, as the protocol would have learned them.
NeighborState neighbor_state_from_graph(const TestGraph& graph, NodeId u,
                                        double window_seconds = 20.0,
                                        double expected_count = 10.0);

/// Random neighbor state: a 1-hop set, 2-hop entries covered by random
/// 1-hop subsets, and optionally a few uncoverable (stale) entries.
NeighborState random_neighbor_state(std::size_t universe, std::uint64_t seed,
                                    bool with_stale_entries = false);

/// Size of the smallest subset of 1-hop neighbors covering all of two_hop,
/// by subset enumeration. Coverage uses the same two_hop map semantics as
/// select_mprs.
std::size_t exact_min_mpr_cover(const NeighborState& state);

/// True iff every 2-hop neighbor in the state is covered by some member of
/// the given set.
bool covers_all_two_hop(const NeighborState& state, const std::set<NodeId>& chosen);

/// Widest-path value by exhaustive enumeration of simple paths.
double widest_path_by_enumeration(const Topology& topology, NodeId s, NodeId t);

} // namespace mhop::testing
