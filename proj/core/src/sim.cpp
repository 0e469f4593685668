#include "mhopsim/sim.hpp"

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <deque>
#include <set>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace mhop {

bool transmit_succeeds(const LinkQuality& link, Direction direction, Rng& rng) {
    const double p = direction == Direction::Forward ? link.fd : link.rd;
    return rng.bernoulli(p);
}

double transmission_delay(int size_bytes, double link_rate_bps) {
    return static_cast<double>(size_bytes) * 8.0 / link_rate_bps;
}

Performance finalize_stats(const SimStats& stats, double duration) {
    if (duration <= 0.0) throw std::invalid_argument("finalize_stats: non-positive duration");
    Performance perf;
    perf.throughput = static_cast<double>(stats.data_delivered) / duration;
    if (stats.data_delivered > 0) {
        perf.e2ed = stats.latency_sum / static_cast<double>(stats.data_delivered);
        perf.nrl = static_cast<double>(stats.routing_packets_transmitted()) /
                   static_cast<double>(stats.data_delivered);
    }
    return perf;
}

std::vector<CbrFlow> make_random_flows(std::size_t count, std::size_t node_count, double rate,
                                       double start, double stop, std::uint64_t seed) {
    if (node_count < 2) throw std::invalid_argument("make_random_flows: need at least 2 nodes");
    if (rate <= 0.0) throw std::invalid_argument("make_random_flows: non-positive rate");
    if (count > node_count * (node_count - 1))
        throw std::invalid_argument("make_random_flows: more pairs than exist");

    Rng rng(seed);
    std::set<std::pair<NodeId, NodeId>> chosen;
    std::vector<CbrFlow> flows;
    flows.reserve(count);
    while (flows.size() < count) {
        const NodeId src = static_cast<NodeId>(rng.uniform_int(node_count));
        const NodeId dst = static_cast<NodeId>(rng.uniform_int(node_count));
        if (src == dst || !chosen.emplace(src, dst).second) continue;
        CbrFlow f;
        f.src = src;
        f.dst = dst;
        f.rate = rate;
        f.start = start + (static_cast<double>(flows.size()) / static_cast<double>(count)) / rate;
        f.stop = stop;
        flows.push_back(f);
    }
    return flows;
}

namespace {

enum class PacketKind : std::uint8_t { Hello, Tc, MdProbe, Data };

// Which counter a transmission belongs to. Forwarded flood copies are kept
// apart from originations so interval-driven TC counts stay exact.
enum class TxClass : std::uint8_t { Hello, TcDefault, TcTriggered, TcForward, Probe, Data };

struct Packet {
    PacketKind kind = PacketKind::Data;
    NodeId src = 0;
    NodeId dst = 0; // meaningless for broadcasts
    double origin_time = 0.0;
    int size_bytes = 0;
    unsigned hop_count = 0; // completed link transmissions
    NodeId tx_from = 0;     // previous hop, set when transmitted
    std::shared_ptr<const HelloMessage> hello;
    std::shared_ptr<const TcMessage> tc;
};

enum class EvKind : std::uint8_t {
    HelloTimer,
    TcTimer,
    ServiceDone,
    Arrival,
    TrafficEmit,
    RouteRecompute,
};

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0; // insertion order, breaks time ties deterministically
    EvKind kind = EvKind::HelloTimer;
    NodeId node = 0;
    std::uint32_t flow = 0;
    Packet pkt; // Arrival only
};

// Iterable binary min-heap on (time, seq); iteration is needed for the
// in-flight scan at end of run.
class EventQueue {
public:
    void push(Event ev) {
        heap_.push_back(std::move(ev));
        std::push_heap(heap_.begin(), heap_.end(), after);
    }
    Event pop() {
        std::pop_heap(heap_.begin(), heap_.end(), after);
        Event ev = std::move(heap_.back());
        heap_.pop_back();
        return ev;
    }
    bool empty() const { return heap_.empty(); }
    const Event& top() const { return heap_.front(); }
    const std::vector<Event>& entries() const { return heap_; }

private:
    static bool after(const Event& a, const Event& b) {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
    std::vector<Event> heap_;
};

struct TxEntry {
    Packet pkt;
    NodeId next_hop = 0; // unicast target
    bool broadcast = false;
    TxClass cls = TxClass::Data;
};

struct NodeRt {
    explicit NodeRt(OlsrNode olsr_node) : olsr(std::move(olsr_node)) {}
    OlsrNode olsr;
    std::deque<TxEntry> queue;
    bool serving = false;
    double hello_base = 0.0;
    double tc_base = 0.0;
    bool route_dirty = false;
    bool recompute_pending = false;
    double last_recompute = -1e18;
};

class Engine {
public:
    Engine(const Topology& topology, const SimParams& params, std::span<const CbrFlow> flows)
        : topo_(topology), p_(params), flows_(flows),
          rng_(derive_seed(params.seed, /*tag=*/0x51)) {
        validate();
        nodes_.reserve(topo_.node_count());
        for (NodeId i = 0; i < topo_.node_count(); ++i)
            nodes_.emplace_back(OlsrNode(i, p_.olsr, p_.metric));
    }

    SimStats run() {
        if (p_.duration <= 0.0) return stats_; // empty horizon, nothing happens
        for (NodeId i = 0; i < topo_.node_count(); ++i) {
            schedule_hello(i);
            schedule_tc(i);
        }
        for (std::uint32_t f = 0; f < flows_.size(); ++f) {
            if (flows_[f].start <= flows_[f].stop)
                schedule(flows_[f].start, EvKind::TrafficEmit, flows_[f].src, f);
        }

        while (!queue_.empty() && queue_.top().time < p_.duration) {
            Event ev = queue_.pop();
            now_ = ev.time;
            dispatch(ev);
        }

        finish();
        return stats_;
    }

private:
    void validate() const {
        if (p_.duration < 0.0) throw std::invalid_argument("run_simulation: negative duration");
        if (p_.warmup < 0.0) throw std::invalid_argument("run_simulation: negative warmup");
        if (p_.link_rate_bps <= 0.0 || p_.propagation_delay_s < 0.0 || p_.queue_capacity == 0)
            throw std::invalid_argument("run_simulation: bad channel parameters");
        p_.olsr.validate();
        for (const auto& f : flows_) {
            if (f.src == f.dst || f.src >= topo_.node_count() || f.dst >= topo_.node_count())
                throw std::invalid_argument("run_simulation: flow endpoints invalid");
            if (f.rate <= 0.0 || f.start > f.stop)
                throw std::invalid_argument("run_simulation: flow schedule invalid");
        }
    }

    bool counted() const { return now_ >= p_.warmup; }

    void schedule(double t, EvKind kind, NodeId node, std::uint32_t flow = 0, Packet pkt = {}) {
        Event ev;
        ev.time = t;
        ev.seq = next_seq_++;
        ev.kind = kind;
        ev.node = node;
        ev.flow = flow;
        ev.pkt = std::move(pkt);
        queue_.push(std::move(ev));
    }

    double jitter(double interval) {
        return p_.control_jitter ? rng_.uniform(0.0, 0.1 * interval) : 0.0;
    }

    void schedule_hello(NodeId n) {
        schedule(nodes_[n].hello_base + jitter(p_.olsr.hello_interval), EvKind::HelloTimer, n);
    }

    void schedule_tc(NodeId n) {
        schedule(nodes_[n].tc_base + jitter(p_.olsr.tc_interval), EvKind::TcTimer, n);
    }

    void trace(const char* kind, NodeId node, const char* fmt, ...) {
        if (!p_.trace) return;
        char detail[160];
        va_list args;
        va_start(args, fmt);
        std::vsnprintf(detail, sizeof(detail), fmt, args);
        va_end(args);
        char line[224];
        std::snprintf(line, sizeof(line), "%.9f %s %u %s\n", now_, kind, node, detail);
        *p_.trace << line;
    }

    void dispatch(const Event& ev) {
        switch (ev.kind) {
        case EvKind::HelloTimer: on_hello_timer(ev.node); break;
        case EvKind::TcTimer: on_tc_timer(ev.node); break;
        case EvKind::ServiceDone: on_service_done(ev.node); break;
        case EvKind::Arrival: on_arrival(ev.node, ev.pkt); break;
        case EvKind::TrafficEmit: on_traffic_emit(ev.flow); break;
        case EvKind::RouteRecompute: on_route_recompute(ev.node); break;
        }
    }

    void mark_dirty(NodeId n) {
        NodeRt& rt = nodes_[n];
        rt.route_dirty = true;
        if (!rt.recompute_pending) {
            rt.recompute_pending = true;
            schedule(std::max(now_, rt.last_recompute + p_.route_debounce_s),
                     EvKind::RouteRecompute, n);
        }
    }

    void note_mpr_change(NodeId n) {
        if (p_.artifacts)
            p_.artifacts->mpr_changes.push_back(
                {now_, n, nodes_[n].olsr.state().mpr_set.size()});
    }

    void enqueue(NodeId n, TxEntry entry) {
        NodeRt& rt = nodes_[n];
        if (rt.queue.size() >= p_.queue_capacity) {
            if (entry.pkt.kind == PacketKind::Data)
                ++stats_.drop_queue;
            else if (counted())
                ++stats_.control_queue_drops;
            return;
        }
        rt.queue.push_back(std::move(entry));
        if (!rt.serving) {
            rt.serving = true;
            schedule(now_ + transmission_delay(rt.queue.front().pkt.size_bytes, p_.link_rate_bps),
                     EvKind::ServiceDone, n);
        }
    }

    void emit_triggered_tc(NodeId n) {
        NodeRt& rt = nodes_[n];
        note_mpr_change(n);
        TcMessage tc = rt.olsr.make_tc(now_, /*triggered=*/true);
        Packet pkt;
        pkt.kind = PacketKind::Tc;
        pkt.src = n;
        pkt.origin_time = now_;
        pkt.size_bytes = tc.size_bytes();
        pkt.tc = std::make_shared<const TcMessage>(std::move(tc));
        trace("timer", n, "tc_emit seq=%u triggered=1", pkt.tc->sequence);
        enqueue(n, TxEntry{std::move(pkt), 0, true, TxClass::TcTriggered});
    }

    void on_hello_timer(NodeId n) {
        NodeRt& rt = nodes_[n];
        bool dirty = rt.olsr.expire_neighbors(now_);
        const bool mpr_changed = rt.olsr.refresh_mprs();
        auto hello = rt.olsr.make_hello(now_);
        dirty = dirty || hello.estimates_changed;

        Packet pkt;
        pkt.kind = PacketKind::Hello;
        pkt.src = n;
        pkt.origin_time = now_;
        pkt.size_bytes = hello.msg.size_bytes();
        pkt.hello = std::make_shared<const HelloMessage>(std::move(hello.msg));
        trace("timer", n, "hello_emit neighbors=%zu", pkt.hello->neighbor_list.size());
        enqueue(n, TxEntry{std::move(pkt), 0, true, TxClass::Hello});

        if (p_.metric == MetricKind::Md) {
            for (const auto& [nb, info] : rt.olsr.state().one_hop) {
                Packet probe;
                probe.kind = PacketKind::MdProbe;
                probe.src = n;
                probe.dst = nb;
                probe.origin_time = now_;
                probe.size_bytes = kProbePacketBytes;
                enqueue(n, TxEntry{std::move(probe), nb, false, TxClass::Probe});
            }
        }

        if (mpr_changed) emit_triggered_tc(n);
        if (dirty) mark_dirty(n);

        rt.hello_base += p_.olsr.hello_interval;
        schedule_hello(n);
    }

    void on_tc_timer(NodeId n) {
        NodeRt& rt = nodes_[n];
        TcMessage tc = rt.olsr.make_tc(now_, /*triggered=*/false);
        Packet pkt;
        pkt.kind = PacketKind::Tc;
        pkt.src = n;
        pkt.origin_time = now_;
        pkt.size_bytes = tc.size_bytes();
        pkt.tc = std::make_shared<const TcMessage>(std::move(tc));
        trace("timer", n, "tc_emit seq=%u triggered=0", pkt.tc->sequence);
        enqueue(n, TxEntry{std::move(pkt), 0, true, TxClass::TcDefault});

        rt.tc_base += p_.olsr.tc_interval;
        schedule_tc(n);
    }

    void count_tx(TxClass cls) {
        if (cls == TxClass::Data) {
            ++stats_.data_tx;
            return;
        }
        if (!counted()) return;
        switch (cls) {
        case TxClass::Hello: ++stats_.hello_tx; break;
        case TxClass::TcDefault: ++stats_.tc_default_tx; break;
        case TxClass::TcTriggered: ++stats_.tc_triggered_tx; break;
        case TxClass::TcForward: ++stats_.tc_forward_tx; break;
        case TxClass::Probe: ++stats_.probe_tx; break;
        case TxClass::Data: break;
        }
    }

    void on_service_done(NodeId n) {
        NodeRt& rt = nodes_[n];
        TxEntry entry = std::move(rt.queue.front());
        rt.queue.pop_front();

        count_tx(entry.cls);
        entry.pkt.tx_from = n;

        if (entry.broadcast) {
            // One transmission; each in-range receiver draws independently
            // on its directional delivery probability.
            for (const auto& nb : topo_.neighbors(n)) {
                const bool delivered = rng_.bernoulli(nb.fd);
                if (delivered) {
                    Packet copy = entry.pkt;
                    copy.hop_count = entry.pkt.hop_count + 1;
                    schedule(now_ + p_.propagation_delay_s, EvKind::Arrival, nb.id, 0,
                             std::move(copy));
                }
            }
        } else {
            const auto link = topo_.link(n, entry.next_hop);
            const bool delivered = link && rng_.bernoulli(link->fd);
            if (delivered) {
                Packet copy = std::move(entry.pkt);
                copy.hop_count += 1;
                schedule(now_ + p_.propagation_delay_s, EvKind::Arrival, entry.next_hop, 0,
                         std::move(copy));
            } else if (entry.pkt.kind == PacketKind::Data) {
                ++stats_.drop_link_loss;
            }
        }

        if (!rt.queue.empty()) {
            schedule(now_ + transmission_delay(rt.queue.front().pkt.size_bytes, p_.link_rate_bps),
                     EvKind::ServiceDone, n);
        } else {
            rt.serving = false;
        }
    }

    void count_control_latency(PacketKind kind, bool triggered, double latency) {
        if (!counted()) return;
        switch (kind) {
        case PacketKind::Hello:
            stats_.periodic_latency_sum += latency;
            ++stats_.periodic_latency_count;
            break;
        case PacketKind::Tc:
            if (triggered) {
                stats_.triggered_latency_sum += latency;
                ++stats_.triggered_latency_count;
            } else {
                stats_.periodic_latency_sum += latency;
                ++stats_.periodic_latency_count;
            }
            break;
        case PacketKind::MdProbe:
            stats_.probe_latency_sum += latency;
            ++stats_.probe_latency_count;
            break;
        case PacketKind::Data: break;
        }
    }

    void on_arrival(NodeId n, const Packet& pkt) {
        NodeRt& rt = nodes_[n];
        switch (pkt.kind) {
        case PacketKind::Hello: {
            if (counted()) ++stats_.hello_rx;
            count_control_latency(pkt.kind, false, now_ - pkt.origin_time);
            trace("packet_arrival", n, "hello from=%u", pkt.src);
            const bool changed = rt.olsr.process_hello(*pkt.hello, now_);
            const bool mpr_changed = rt.olsr.refresh_mprs();
            if (mpr_changed) emit_triggered_tc(n);
            if (changed) mark_dirty(n);
            break;
        }
        case PacketKind::Tc: {
            if (counted()) {
                ++stats_.tc_rx;
                if (pkt.tx_from == pkt.tc->origin) {
                    if (pkt.tc->triggered)
                        ++stats_.tc_triggered_first_hop_rx;
                    else
                        ++stats_.tc_default_first_hop_rx;
                }
            }
            count_control_latency(pkt.kind, pkt.tc->triggered, now_ - pkt.origin_time);
            trace("packet_arrival", n, "tc origin=%u seq=%u", pkt.tc->origin, pkt.tc->sequence);
            const auto decision = rt.olsr.handle_tc(*pkt.tc, pkt.tx_from);
            if (decision.content_changed) mark_dirty(n);
            if (decision.forward) {
                Packet fwd = pkt; // same origin, sequence and origin_time
                enqueue(n, TxEntry{std::move(fwd), 0, true,
                                   TxClass::TcForward});
            }
            break;
        }
        case PacketKind::MdProbe: {
            if (counted()) ++stats_.probe_rx;
            count_control_latency(pkt.kind, false, now_ - pkt.origin_time);
            trace("packet_arrival", n, "probe from=%u", pkt.src);
            rt.olsr.record_probe_sample(pkt.src, now_ - pkt.origin_time);
            break;
        }
        case PacketKind::Data: {
            trace("packet_arrival", n, "data src=%u dst=%u hops=%u", pkt.src, pkt.dst,
                  pkt.hop_count);
            forward_data(n, pkt);
            break;
        }
        }
    }

    // Hop-by-hop forwarding: deliver here, or commit the packet to the
    // current next hop's transmit queue. Drops are counted outcomes.
    void forward_data(NodeId n, const Packet& pkt) {
        if (pkt.dst == n) {
            ++stats_.data_delivered;
            stats_.latency_sum += now_ - pkt.origin_time;
            stats_.bytes_delivered += static_cast<std::uint64_t>(pkt.size_bytes);
            trace("packet_arrival", n, "data_delivered src=%u hops=%u latency=%.6f", pkt.src,
                  pkt.hop_count, now_ - pkt.origin_time);
            return;
        }
        if (pkt.hop_count >= p_.data_ttl) {
            ++stats_.drop_ttl;
            return;
        }
        const RoutingTable& routes = nodes_[n].olsr.routes();
        auto it = routes.find(pkt.dst);
        if (it == routes.end()) {
            ++stats_.drop_no_route;
            return;
        }
        enqueue(n, TxEntry{pkt, it->second.next_hop, false, TxClass::Data});
    }

    void on_traffic_emit(std::uint32_t flow_idx) {
        const CbrFlow& flow = flows_[flow_idx];
        trace("traffic_emit", flow.src, "dst=%u", flow.dst);
        ++stats_.data_sent;
        Packet pkt;
        pkt.kind = PacketKind::Data;
        pkt.src = flow.src;
        pkt.dst = flow.dst;
        pkt.origin_time = now_;
        pkt.size_bytes = kDataPacketBytes;
        forward_data(flow.src, pkt);

        const double next = now_ + 1.0 / flow.rate;
        if (next <= flow.stop) schedule(next, EvKind::TrafficEmit, flow.src, flow_idx);
    }

    void on_route_recompute(NodeId n) {
        NodeRt& rt = nodes_[n];
        rt.recompute_pending = false;
        if (!rt.route_dirty) return;
        rt.olsr.recompute_routes(now_);
        rt.route_dirty = false;
        rt.last_recompute = now_;
        trace("timer", n, "route_recompute entries=%zu", rt.olsr.routes().size());
    }

    void finish() {
        // In flight = still queued or in the air when the horizon closed.
        for (const auto& rt : nodes_)
            for (const auto& entry : rt.queue)
                if (entry.pkt.kind == PacketKind::Data) ++stats_.data_in_flight_at_end;
        for (const auto& ev : queue_.entries())
            if (ev.kind == EvKind::Arrival && ev.pkt.kind == PacketKind::Data)
                ++stats_.data_in_flight_at_end;

        if (p_.artifacts) {
            p_.artifacts->final_routes.clear();
            p_.artifacts->final_routes.reserve(nodes_.size());
            for (const auto& rt : nodes_) p_.artifacts->final_routes.push_back(rt.olsr.routes());
        }
    }

    const Topology& topo_;
    SimParams p_;
    std::span<const CbrFlow> flows_;
    Rng rng_;
    EventQueue queue_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
    std::vector<NodeRt> nodes_;
    SimStats stats_;
};

} // namespace

SimStats run_simulation(const Topology& topology, const SimParams& params,
                        std::span<const CbrFlow> flows) {
    Engine engine(topology, params, flows);
    return engine.run();
}

} // namespace mhop
