#include "mhopsim/olsr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace mhop {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

} // namespace

OlsrConfig OlsrConfig::olsr_default() { return OlsrConfig{2.0, 5.0, 20.0, 6.0}; }

OlsrConfig OlsrConfig::eolsr() { return OlsrConfig{1.0, 15.0, 10.0, 3.0}; }

std::optional<OlsrConfig> OlsrConfig::profile(std::string_view name) {
    if (name == "olsr-default") return olsr_default();
    if (name == "eolsr") return eolsr();
    return std::nullopt;
}

void OlsrConfig::validate() const {
    if (hello_interval <= 0.0 || tc_interval <= 0.0 || window_w <= 0.0 ||
        neighbor_hold_time <= 0.0)
        throw std::invalid_argument("OlsrConfig: intervals must be positive");
    const double ratio = window_w / hello_interval;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw std::invalid_argument("OlsrConfig: window_w must be a multiple of hello_interval");
}

std::set<NodeId> select_mprs(NeighborState& state) {
    // Drop 2-hop entries no current 1-hop neighbor can cover; they are stale.
    for (auto it = state.two_hop.begin(); it != state.two_hop.end();) {
        bool coverable = false;
        for (const auto& [via, t] : it->second) {
            if (state.one_hop.count(via)) {
                coverable = true;
                break;
            }
        }
        if (!coverable) {
            ++state.stale_two_hop_dropped;
            it = state.two_hop.erase(it);
        } else {
            ++it;
        }
    }

    // Coverage sets restricted to live 1-hop neighbors.
    std::map<NodeId, std::set<NodeId>> covers; // 1-hop id -> covered 2-hop ids
    std::set<NodeId> uncovered;
    for (const auto& [two, vias] : state.two_hop) {
        uncovered.insert(two);
        for (const auto& [via, t] : vias)
            if (state.one_hop.count(via)) covers[via].insert(two);
    }

    std::set<NodeId> selected;
    while (!uncovered.empty()) {
        NodeId best = 0;
        std::size_t best_reach = 0, best_degree = 0;
        bool found = false;
        for (const auto& [v, cov] : covers) {
            if (selected.count(v)) continue;
            std::size_t reach = 0;
            for (NodeId w : cov)
                if (uncovered.count(w)) ++reach;
            if (reach == 0) continue;
            // Max reachability, then max coverage degree, then smallest id.
            // The map iterates in ascending id order, so strict improvement
            // keeps the smallest id among ties.
            if (!found || reach > best_reach ||
                (reach == best_reach && cov.size() > best_degree)) {
                best = v;
                best_reach = reach;
                best_degree = cov.size();
                found = true;
            }
        }
        if (!found) break; // cannot happen after the stale sweep above
        selected.insert(best);
        for (NodeId w : covers[best]) uncovered.erase(w);
    }

    state.mpr_set = selected;
    return selected;
}

bool maybe_trigger_tc(NeighborState& state) {
    const bool changed = state.mpr_set != state.last_mpr_set;
    state.last_mpr_set = state.mpr_set;
    return changed;
}

namespace {

struct Label {
    double value = 0.0;
    unsigned hops = 0;
    NodeId first_hop = 0;
    bool set = false;
};

PathCost label_cost(MetricKind kind, const Label& l) { return PathCost{kind, l.value, l.hops}; }

bool edge_usable(MetricKind kind, const LinkEstimate& e) {
    if (!e.usable()) return false;
    if (kind == MetricKind::Md && !e.delay.has_value()) return false;
    return true;
}

Label extend(MetricKind kind, const Label& from, const LinkEstimate& e, NodeId first_hop) {
    Label out;
    const double p = e.fd * e.rd;
    switch (kind) {
    case MetricKind::Etx: out.value = from.value + 1.0 / p; break;
    case MetricKind::InvEtx: out.value = from.value + p; break;
    case MetricKind::Ml: out.value = from.value * p; break;
    case MetricKind::Md: out.value = from.value + *e.delay; break;
    }
    out.hops = from.hops + 1;
    out.first_hop = first_hop;
    out.set = true;
    return out;
}

} // namespace

RoutingTable compute_routing_table(NodeId self,
                                   const std::map<NodeId, LinkEstimate>& local_links,
                                   const TopologyTable& table, MetricKind metric) {
    // Dense index over every node mentioned anywhere.
    std::map<NodeId, int> index;
    auto touch = [&index](NodeId id) { index.emplace(id, 0); };
    touch(self);
    for (const auto& [id, est] : local_links) touch(id);
    for (const auto& [origin, entry] : table.origins) {
        touch(origin);
        for (const auto& [nb, est] : entry.links) touch(nb);
    }
    std::vector<NodeId> ids;
    ids.reserve(index.size());
    for (auto& [id, slot] : index) {
        slot = static_cast<int>(ids.size());
        ids.push_back(id);
    }

    struct Edge {
        int to;
        LinkEstimate est;
    };
    std::vector<std::vector<Edge>> adj(ids.size());
    auto add_edges = [&](NodeId from, const std::map<NodeId, LinkEstimate>& links) {
        auto& row = adj[index[from]];
        for (const auto& [to, est] : links)
            if (to != from && edge_usable(metric, est)) row.push_back({index[to], est});
    };
    add_edges(self, local_links);
    for (const auto& [origin, entry] : table.origins)
        if (origin != self) add_edges(origin, entry.links);

    const int src = index[self];
    std::vector<Label> dist(ids.size());
    std::vector<char> done(ids.size(), 0);
    dist[src] = Label{metric == MetricKind::Ml ? 1.0 : 0.0, 0, self, true};

    struct QueueItem {
        Label label;
        int node;
    };
    auto worse = [metric](const QueueItem& a, const QueueItem& b) {
        const PathCost ca = label_cost(metric, a.label);
        const PathCost cb = label_cost(metric, b.label);
        if (better(metric, ca, cb)) return false;
        if (better(metric, cb, ca)) return true;
        return std::pair(a.label.first_hop, a.node) > std::pair(b.label.first_hop, b.node);
    };
    std::priority_queue<QueueItem, std::vector<QueueItem>, decltype(worse)> queue(worse);
    queue.push({dist[src], src});

    while (!queue.empty()) {
        const QueueItem top = queue.top();
        queue.pop();
        const int u = top.node;
        if (done[u]) continue;
        const Label& cur = dist[u];
        if (top.label.value != cur.value || top.label.hops != cur.hops ||
            top.label.first_hop != cur.first_hop)
            continue; // superseded entry
        done[u] = 1;
        for (const Edge& e : adj[u]) {
            if (done[e.to]) continue;
            const NodeId hop = (u == src) ? ids[e.to] : cur.first_hop;
            const Label cand = extend(metric, cur, e.est, hop);
            Label& old = dist[e.to];
            bool take = false;
            if (!old.set) {
                take = true;
            } else {
                const PathCost cc = label_cost(metric, cand);
                const PathCost oc = label_cost(metric, old);
                if (better(metric, cc, oc))
                    take = true;
                else if (equivalent_cost(metric, cc, oc) && cand.first_hop < old.first_hop)
                    take = true;
            }
            if (take) {
                old = cand;
                queue.push({cand, e.to});
            }
        }
    }

    RoutingTable routes;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (static_cast<int>(i) == src || !dist[i].set || !done[i]) continue;
        routes.emplace(ids[i], RouteEntry{dist[i].first_hop, label_cost(metric, dist[i])});
    }
    return routes;
}

void dump_routing_tables(const std::vector<RoutingTable>& tables, std::ostream& out) {
    char buf[64];
    for (std::size_t node = 0; node < tables.size(); ++node) {
        for (const auto& [dest, entry] : tables[node]) {
            std::snprintf(buf, sizeof(buf), "%.12g", entry.cost.value);
            out << "D " << node << " " << dest << " " << entry.next_hop << " " << buf << "\n";
        }
    }
}

OlsrNode::OlsrNode(NodeId self, const OlsrConfig& config, MetricKind metric)
    : self_(self), config_(config), metric_(metric) {
    config_.validate();
}

bool OlsrNode::process_hello(const HelloMessage& msg, double now) {
    if (msg.origin == self_) return false;
    bool changed = false;

    auto [it, inserted] = state_.one_hop.try_emplace(
        msg.origin,
        NeighborInfo{LinkEstimate{}, HelloWindow(config_.window_w, config_.expected_hellos()),
                     now, false});
    NeighborInfo& info = it->second;
    if (inserted) {
        changed = true;
        state_.two_hop.erase(msg.origin); // promoted from 2-hop to 1-hop
    }
    info.window.record(now);
    info.last_heard = now;

    const double rd = delivery_ratio(info.window, now);
    if (rd != info.estimate.rd) {
        info.estimate.rd = rd;
        changed = true;
    }

    // The report addressed to self carries the forward ratio, the MPR flag
    // and the measured outgoing delay; absence means the origin does not
    // hear us at all.
    double fd = 0.0;
    bool selector = false;
    std::optional<double> delay;
    for (const auto& rep : msg.neighbor_list) {
        if (rep.neighbor == self_) {
            fd = clamp01(rep.hello_count_heard / config_.expected_hellos());
            selector = rep.chosen_as_mpr;
            delay = rep.measured_delay;
            break;
        }
    }
    if (fd != info.estimate.fd) {
        info.estimate.fd = fd;
        changed = true;
    }
    info.selector = selector;
    if (delay.has_value() && delay != info.estimate.delay) {
        info.estimate.delay = delay;
        changed = true;
    }

    for (const auto& rep : msg.neighbor_list) {
        if (rep.neighbor == self_ || state_.one_hop.count(rep.neighbor)) continue;
        state_.two_hop[rep.neighbor][msg.origin] = now;
    }

    if (expire_neighbors(now)) changed = true;
    return changed;
}

bool OlsrNode::expire_neighbors(double now) {
    bool removed = false;
    const double cutoff = now - config_.neighbor_hold_time;
    for (auto it = state_.one_hop.begin(); it != state_.one_hop.end();) {
        if (it->second.last_heard < cutoff) {
            incoming_delay_.erase(it->first);
            it = state_.one_hop.erase(it);
            removed = true;
        } else {
            ++it;
        }
    }
    for (auto it = state_.two_hop.begin(); it != state_.two_hop.end();) {
        auto& vias = it->second;
        for (auto vit = vias.begin(); vit != vias.end();) {
            if (vit->second < cutoff || !state_.one_hop.count(vit->first))
                vit = vias.erase(vit);
            else
                ++vit;
        }
        if (vias.empty())
            it = state_.two_hop.erase(it);
        else
            ++it;
    }
    return removed;
}

OlsrNode::HelloOut OlsrNode::make_hello(double now) {
    HelloOut out;
    out.msg.origin = self_;
    out.msg.emitted_at = now;
    for (auto& [id, info] : state_.one_hop) {
        const int heard = info.window.count(now);
        const double rd = clamp01(heard / config_.expected_hellos());
        if (rd != info.estimate.rd) {
            info.estimate.rd = rd;
            out.estimates_changed = true;
        }
        HelloLinkReport rep;
        rep.neighbor = id;
        rep.hello_count_heard = heard;
        rep.chosen_as_mpr = state_.mpr_set.count(id) > 0;
        if (auto it = incoming_delay_.find(id); it != incoming_delay_.end())
            rep.measured_delay = it->second;
        out.msg.neighbor_list.push_back(rep);
    }
    return out;
}

bool OlsrNode::refresh_mprs() {
    select_mprs(state_);
    return maybe_trigger_tc(state_);
}

TcMessage OlsrNode::make_tc(double now, bool triggered) {
    TcMessage tc;
    tc.origin = self_;
    tc.sequence = ++tc_sequence_;
    tc.triggered = triggered;
    for (auto& [id, info] : state_.one_hop) {
        if (!info.selector) continue;
        info.estimate.rd = delivery_ratio(info.window, now);
        tc.advertised.push_back({id, info.estimate});
    }
    return tc;
}

OlsrNode::TcDecision OlsrNode::handle_tc(const TcMessage& msg, NodeId arrived_from) {
    TcDecision decision;
    if (msg.origin == self_) return decision;

    auto [seq_it, first] = seen_tc_seq_.try_emplace(msg.origin, 0);
    if (!first && msg.sequence <= seq_it->second) return decision; // duplicate or stale
    seq_it->second = msg.sequence;
    decision.fresh = true;

    std::map<NodeId, LinkEstimate> links;
    for (const auto& adv : msg.advertised) links.emplace(adv.neighbor, adv.estimate);

    TopologyTable::OriginEntry& entry = table_.origins[msg.origin];
    decision.content_changed = entry.links != links;
    entry.sequence = msg.sequence;
    entry.links = std::move(links);

    auto nb = state_.one_hop.find(arrived_from);
    decision.forward = nb != state_.one_hop.end() && nb->second.selector;
    return decision;
}

void OlsrNode::record_probe_sample(NodeId from, double sample) {
    std::optional<double> current;
    if (auto it = incoming_delay_.find(from); it != incoming_delay_.end()) current = it->second;
    incoming_delay_[from] = update_delay_estimate(current, sample);
}

std::map<NodeId, LinkEstimate> OlsrNode::usable_local_links(double now) {
    std::map<NodeId, LinkEstimate> out;
    for (auto& [id, info] : state_.one_hop) {
        info.estimate.rd = delivery_ratio(info.window, now);
        if (info.estimate.usable()) out.emplace(id, info.estimate);
    }
    return out;
}

void OlsrNode::recompute_routes(double now) {
    routes_ = compute_routing_table(self_, usable_local_links(now), table_, metric_);
}

} // namespace mhop
