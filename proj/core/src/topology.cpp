#include "mhopsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "mhopsim/rng.hpp"

namespace mhop {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// %.17g round-trips IEEE doubles exactly.
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

double link_delivery_probability(double distance, double radio_range) {
    if (distance < 0.0)
        throw std::invalid_argument("link_delivery_probability: negative distance");
    if (radio_range <= 0.0)
        throw std::invalid_argument("link_delivery_probability: non-positive radio range");
    if (distance >= radio_range) return 0.0;
    const double knee = 0.5 * radio_range;
    if (distance <= knee) return 1.0;
    return (radio_range - distance) / (radio_range - knee);
}

Topology::Topology(double side, double radio_range, std::vector<Position> positions)
    : side_(side), radio_range_(radio_range), positions_(std::move(positions)),
      adjacency_(positions_.size()) {}

void Topology::add_link(NodeId i, NodeId j, double fd_ij, double fd_ji, double capacity) {
    if (i == j) throw std::invalid_argument("add_link: self-link");
    if (i >= positions_.size() || j >= positions_.size())
        throw std::invalid_argument("add_link: node id out of range");
    if (find(i, j) != nullptr) throw std::invalid_argument("add_link: duplicate link");

    auto insert = [this](NodeId from, NodeId to, double fd, double rd, double cap) {
        auto& row = adjacency_[from];
        Neighbor nb{to, fd, rd, cap};
        row.insert(std::lower_bound(row.begin(), row.end(), to,
                                    [](const Neighbor& n, NodeId id) { return n.id < id; }),
                   nb);
    };
    insert(i, j, fd_ij, fd_ji, capacity);
    insert(j, i, fd_ji, fd_ij, capacity);
}

std::span<const Topology::Neighbor> Topology::neighbors(NodeId id) const {
    return adjacency_[id];
}

const Topology::Neighbor* Topology::find(NodeId i, NodeId j) const {
    if (i >= adjacency_.size()) return nullptr;
    const auto& row = adjacency_[i];
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const Neighbor& n, NodeId id) { return n.id < id; });
    if (it == row.end() || it->id != j) return nullptr;
    return &*it;
}

std::optional<LinkQuality> Topology::link(NodeId i, NodeId j) const {
    const Neighbor* nb = find(i, j);
    if (!nb) return std::nullopt;
    return LinkQuality{nb->fd, nb->rd};
}

std::optional<double> Topology::capacity(NodeId i, NodeId j) const {
    const Neighbor* nb = find(i, j);
    if (!nb) return std::nullopt;
    return nb->capacity;
}

std::size_t Topology::link_count() const {
    std::size_t directed = 0;
    for (const auto& row : adjacency_) directed += row.size();
    return directed / 2;
}

Topology generate_topology(std::uint32_t n, double side, double radio_range,
                           std::uint64_t seed, double default_capacity) {
    if (n < 2) throw std::invalid_argument("generate_topology: need at least 2 nodes");
    if (side <= 0.0 || radio_range <= 0.0)
        throw std::invalid_argument("generate_topology: non-positive dimensions");

    Rng rng(seed);
    std::vector<Position> positions(n);
    for (auto& p : positions) {
        p.x = rng.uniform01() * side;
        p.y = rng.uniform01() * side;
    }

    Topology topo(side, radio_range, std::move(positions));
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            const auto& a = topo.position(i);
            const auto& b = topo.position(j);
            const double dist = std::hypot(a.x - b.x, a.y - b.y);
            if (dist > radio_range) continue;
            const double base = link_delivery_probability(dist, radio_range);
            const double fd_ij = clamp01(base * rng.uniform(0.9, 1.0));
            const double fd_ji = clamp01(base * rng.uniform(0.9, 1.0));
            topo.add_link(i, j, fd_ij, fd_ji, default_capacity);
        }
    }
    return topo;
}

bool connectivity_check(const Topology& topology) {
    const std::size_t n = topology.node_count();
    if (n == 0) return true;
    std::vector<char> seen(n, 0);
    std::queue<NodeId> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop();
        for (const auto& nb : topology.neighbors(u)) {
            if (!seen[nb.id]) {
                seen[nb.id] = 1;
                ++reached;
                frontier.push(nb.id);
            }
        }
    }
    return reached == n;
}

ConnectedTopology generate_connected_topology(std::uint32_t n, double side,
                                              double radio_range, std::uint64_t seed,
                                              double default_capacity) {
    for (std::uint64_t s = seed;; ++s) {
        Topology topo = generate_topology(n, side, radio_range, s, default_capacity);
        if (connectivity_check(topo)) return {std::move(topo), s};
    }
}

void save_topology(const Topology& topology, std::ostream& out) {
    out << "# side=" << fmt_double(topology.side())
        << " range=" << fmt_double(topology.radio_range()) << "\n";
    for (NodeId i = 0; i < topology.node_count(); ++i) {
        const auto& p = topology.position(i);
        out << "N " << i << " " << fmt_double(p.x) << " " << fmt_double(p.y) << "\n";
    }
    for (NodeId i = 0; i < topology.node_count(); ++i) {
        for (const auto& nb : topology.neighbors(i)) {
            if (nb.id < i) continue; // each undirected link once, i < j
            out << "L " << i << " " << nb.id << " " << fmt_double(nb.fd) << " "
                << fmt_double(nb.rd) << " " << fmt_double(nb.capacity) << "\n";
        }
    }
}

std::string topology_to_string(const Topology& topology) {
    std::ostringstream os;
    save_topology(topology, os);
    return os.str();
}

Topology load_topology(std::istream& in) {
    double side = 0.0, range = 0.0;
    std::vector<std::pair<NodeId, Position>> nodes;
    struct RawLink {
        NodeId i, j;
        double fd, rd, cap;
    };
    std::vector<RawLink> links;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::sscanf(line.c_str(), "# side=%lf range=%lf", &side, &range);
            continue;
        }
        std::istringstream ls(line);
        char tag = 0;
        ls >> tag;
        if (tag == 'N') {
            NodeId id;
            Position p;
            if (!(ls >> id >> p.x >> p.y))
                throw std::runtime_error("load_topology: bad node line " + std::to_string(lineno));
            nodes.emplace_back(id, p);
        } else if (tag == 'L') {
            RawLink l{};
            if (!(ls >> l.i >> l.j >> l.fd >> l.rd >> l.cap))
                throw std::runtime_error("load_topology: bad link line " + std::to_string(lineno));
            links.push_back(l);
        } else {
            throw std::runtime_error("load_topology: unknown line tag at line " +
                                     std::to_string(lineno));
        }
    }

    std::vector<Position> positions(nodes.size());
    std::vector<char> present(nodes.size(), 0);
    for (const auto& [id, p] : nodes) {
        if (id >= positions.size() || present[id])
            throw std::runtime_error("load_topology: node ids must be dense and unique");
        positions[id] = p;
        present[id] = 1;
    }

    Topology topo(side, range, std::move(positions));
    for (const auto& l : links) topo.add_link(l.i, l.j, l.fd, l.rd, l.cap);
    return topo;
}

} // namespace mhop
