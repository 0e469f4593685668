#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mhop {

using NodeId = std::uint32_t;

struct Position {
    double x = 0.0;
    double y = 0.0;
};

/// Directional delivery probabilities of a link viewed from one endpoint:
/// fd is the delivery probability in the stated forward direction, rd the
/// reverse. The stored pair for (j,i) is the swap of the pair for (i,j).
struct LinkQuality {
    double fd = 0.0;
    double rd = 0.0;
};

/// Probability that a transmission over the given distance is delivered:
/// 1.0 up to half the radio range, then linear decay to 0.0 at the range
/// boundary, 0.0 beyond. Monotone non-increasing in distance.
double link_delivery_probability(double distance, double radio_range);

/// Static node placement plus the bidirectional link set. Immutable once
/// built; safe to share read-only across concurrent simulation runs.
class Topology {
public:
    struct Neighbor {
        NodeId id = 0;
        double fd = 0.0;       // delivery probability owner -> id
        double rd = 0.0;       // delivery probability id -> owner
        double capacity = 0.0; // link rate, packets/s
        bool operator==(const Neighbor&) const = default;
    };

    Topology() = default;
    Topology(double side, double radio_range, std::vector<Position> positions);

    std::size_t node_count() const { return positions_.size(); }
    double side() const { return side_; }
    double radio_range() const { return radio_range_; }
    const Position& position(NodeId id) const { return positions_[id]; }

    /// Inserts the symmetric pair of directed records for one undirected
    /// link. fd_ij is the delivery probability i->j, fd_ji the probability
    /// j->i. Rejects self-links, unknown ids and duplicates.
    void add_link(NodeId i, NodeId j, double fd_ij, double fd_ji, double capacity);

    std::span<const Neighbor> neighbors(NodeId id) const;

    /// Link quality oriented i->j (fd = i->j, rd = j->i), if the link exists.
    std::optional<LinkQuality> link(NodeId i, NodeId j) const;
    std::optional<double> capacity(NodeId i, NodeId j) const;
    bool has_link(NodeId i, NodeId j) const { return link(i, j).has_value(); }

    /// Number of undirected links.
    std::size_t link_count() const;

    bool operator==(const Topology&) const = default;

private:
    const Neighbor* find(NodeId i, NodeId j) const;

    double side_ = 0.0;
    double radio_range_ = 0.0;
    std::vector<Position> positions_;
    std::vector<std::vector<Neighbor>> adjacency_; // each sorted by neighbor id
};

/// Places n nodes uniformly at random in a side x side area and links every
/// pair within radio range. Each link direction gets delivery probability
/// link_delivery_probability(distance) scaled by an independent jitter
/// factor uniform in [0.9, 1.0], so the channel may be asymmetric. Equal
/// inputs produce bit-identical topologies.
Topology generate_topology(std::uint32_t n, double side, double radio_range,
                           std::uint64_t seed, double default_capacity = 100.0);

/// True iff every node is reachable from node 0 over the link graph.
bool connectivity_check(const Topology& topology);

struct ConnectedTopology {
    Topology topology;
    std::uint64_t used_seed = 0; // seed actually used after regeneration
};

/// Regenerates with seed+1, seed+2, ... until connectivity_check passes.
/// The seed that produced the returned topology is reported so run metadata
/// can record it.
ConnectedTopology generate_connected_topology(std::uint32_t n, double side,
                                              double radio_range, std::uint64_t seed,
                                              double default_capacity = 100.0);

/// Plain-text serialization: `N <id> <x> <y>` per node and
/// `L <i> <j> <fd> <rd> <cap>` per undirected link (i < j, fd oriented
/// i->j). A leading `# side=<s> range=<r>` comment carries the geometry.
void save_topology(const Topology& topology, std::ostream& out);
Topology load_topology(std::istream& in);
std::string topology_to_string(const Topology& topology);

} // namespace mhop
