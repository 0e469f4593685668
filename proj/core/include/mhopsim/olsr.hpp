#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "mhopsim/link_metrics.hpp"
#include "mhopsim/topology.hpp"

namespace mhop {

struct OlsrConfig {
    double hello_interval = 2.0;
    double tc_interval = 5.0;
    double window_w = 20.0;        // delivery-ratio window, a multiple of hello_interval
    double neighbor_hold_time = 6.0; // 3 * hello_interval

    double expected_hellos() const { return window_w / hello_interval; }

    static OlsrConfig olsr_default(); // hello 2 s, tc 5 s, w 20
    static OlsrConfig eolsr();        // hello 1 s, tc 15 s, w 10
    static std::optional<OlsrConfig> profile(std::string_view name);

    void validate() const;
};

/// Per-neighbor entry carried in a HELLO. Besides the neighbor id it
/// reports how many of that neighbor's HELLOs the origin heard in its
/// window (which lets the neighbor derive its forward ratio), whether the
/// origin picked the neighbor as MPR (so the neighbor learns it must relay
/// floods), and the origin's probe-measured one-way delay of the
/// neighbor->origin direction (so the neighbor learns its outgoing delay).
struct HelloLinkReport {
    NodeId neighbor = 0;
    int hello_count_heard = 0;
    bool chosen_as_mpr = false;
    std::optional<double> measured_delay;
};

struct HelloMessage {
    NodeId origin = 0;
    std::vector<HelloLinkReport> neighbor_list; // sorted by neighbor id
    double emitted_at = 0.0;

    int size_bytes() const { return 16 + 8 * static_cast<int>(neighbor_list.size()); }
};

struct TcAdvertisedLink {
    NodeId neighbor = 0;
    LinkEstimate estimate; // origin's estimate of the origin->neighbor link
};

struct TcMessage {
    NodeId origin = 0;
    std::vector<TcAdvertisedLink> advertised; // sorted by neighbor id
    std::uint32_t sequence = 0;               // strictly increasing per origin
    bool triggered = false;                   // emitted on MPR change rather than on the interval

    int size_bytes() const { return 16 + 8 * static_cast<int>(advertised.size()); }
};

struct NeighborInfo {
    LinkEstimate estimate; // self->neighbor
    HelloWindow window;    // receipts of the neighbor's HELLOs
    double last_heard = 0.0;
    bool selector = false; // neighbor chose self as MPR
};

/// Neighborhood view of one node. two_hop maps each strict 2-hop neighbor
/// to the 1-hop neighbors covering it, with the time each cover was last
/// confirmed (for hold-time expiry). two_hop never contains self or any
/// current 1-hop neighbor.
struct NeighborState {
    std::map<NodeId, NeighborInfo> one_hop;
    std::map<NodeId, std::map<NodeId, double>> two_hop;
    std::set<NodeId> mpr_set;
    std::set<NodeId> last_mpr_set;
    std::uint64_t stale_two_hop_dropped = 0;
};

/// Greedy MPR selection: repeatedly take the 1-hop neighbor covering the
/// most still-uncovered 2-hop neighbors, breaking ties by higher total
/// coverage degree, then by smaller id, until all of two_hop is covered.
/// 2-hop entries no 1-hop neighbor can cover are dropped as stale. The
/// result is stored in state.mpr_set and returned.
std::set<NodeId> select_mprs(NeighborState& state);

/// True iff the MPR set differs from the last one announced; updates
/// last_mpr_set either way.
bool maybe_trigger_tc(NeighborState& state);

/// Link-state database assembled from TC floods: per origin, the newest
/// sequence number and the links it advertised (directed origin->neighbor
/// edges usable in route computation).
struct TopologyTable {
    struct OriginEntry {
        std::uint32_t sequence = 0;
        std::map<NodeId, LinkEstimate> links;
        bool operator==(const OriginEntry&) const = default;
    };
    std::map<NodeId, OriginEntry> origins;
};

struct RouteEntry {
    NodeId next_hop = 0;
    PathCost cost;
};

/// destination -> (next hop, best path cost). No entry for self or for
/// unreachable destinations.
using RoutingTable = std::map<NodeId, RouteEntry>;

/// Best-path computation over the node's own usable links plus the
/// TC-learned link-state graph, under the selected metric's ordering.
/// Deterministic: exact cost ties are broken by the smaller first hop, and
/// nodes are expanded in a fixed order.
RoutingTable compute_routing_table(NodeId self,
                                   const std::map<NodeId, LinkEstimate>& local_links,
                                   const TopologyTable& table, MetricKind metric);

/// `D <node> <dest> <next_hop> <cost>` lines for every entry of every
/// table, sorted; tables[i] belongs to node i.
void dump_routing_tables(const std::vector<RoutingTable>& tables, std::ostream& out);

/// The full per-node protocol state machine: neighbor sensing, MPR
/// selection, TC origination and flooding, and routing-table maintenance.
/// One instance is owned by exactly one simulated node and driven from the
/// single-threaded event loop of its run.
class OlsrNode {
public:
    OlsrNode(NodeId self, const OlsrConfig& config, MetricKind metric);

    NodeId id() const { return self_; }
    const OlsrConfig& config() const { return config_; }
    MetricKind metric() const { return metric_; }

    /// Ingests one HELLO: records the receipt in the origin's window,
    /// refreshes fd/rd/delay estimates from the report addressed to self,
    /// learns the selector flag, and folds the origin's neighbor list into
    /// the 2-hop set. Returns true when anything routing-relevant changed.
    bool process_hello(const HelloMessage& msg, double now);

    /// Drops 1-hop neighbors unheard for the hold time and prunes stale
    /// 2-hop covers. Returns true if anything was removed.
    bool expire_neighbors(double now);

    /// Builds this node's HELLO: one report per current 1-hop neighbor with
    /// the window count heard, the MPR flag, and the measured incoming
    /// probe delay. Refreshes local rd estimates as a side effect; the
    /// returned flag is true when that changed any estimate.
    struct HelloOut {
        HelloMessage msg;
        bool estimates_changed = false;
    };
    HelloOut make_hello(double now);

    /// Re-runs MPR selection; true means the set changed and a triggered
    /// TC is due.
    bool refresh_mprs();

    /// TC advertising the links to this node's MPR selectors, with fresh
    /// estimates and the next sequence number.
    TcMessage make_tc(double now, bool triggered);

    struct TcDecision {
        bool fresh = false;           // content was newest for its origin and was stored
        bool content_changed = false; // stored content differs from what we had
        bool forward = false;         // relay the flood (first copy and sender picked us as MPR)
    };
    TcDecision handle_tc(const TcMessage& msg, NodeId arrived_from);

    /// Folds a probe's measured one-way delay (neighbor -> self) into the
    /// EWMA that HELLOs report back to that neighbor.
    void record_probe_sample(NodeId from, double sample);

    /// Current usable links to 1-hop neighbors with rd refreshed from the
    /// windows at `now`.
    std::map<NodeId, LinkEstimate> usable_local_links(double now);

    void recompute_routes(double now);
    const RoutingTable& routes() const { return routes_; }

    NeighborState& state() { return state_; }
    const NeighborState& state() const { return state_; }
    const TopologyTable& topology_table() const { return table_; }

private:
    NodeId self_;
    OlsrConfig config_;
    MetricKind metric_;
    NeighborState state_;
    TopologyTable table_;
    RoutingTable routes_;
    std::uint32_t tc_sequence_ = 0;
    std::map<NodeId, double> incoming_delay_;     // probe EWMA per neighbor
    std::map<NodeId, std::uint32_t> seen_tc_seq_; // duplicate/stale suppression per origin
};

} // namespace mhop
