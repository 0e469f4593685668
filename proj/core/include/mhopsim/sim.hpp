#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mhopsim/olsr.hpp"
#include "mhopsim/rng.hpp"
#include "mhopsim/topology.hpp"

namespace mhop {

/// Constant-bit-rate flow: fixed-size data packets every 1/rate seconds
/// from start to stop.
struct CbrFlow {
    NodeId src = 0;
    NodeId dst = 0;
    double rate = 1.0; // packets per second
    double start = 0.0;
    double stop = 0.0;
};

struct MprChange {
    double time = 0.0;
    NodeId node = 0;
    std::size_t mpr_size = 0;
};
using MprChangeLog = std::vector<MprChange>;

/// Optional collection sinks filled during a run.
struct SimArtifacts {
    MprChangeLog mpr_changes;             // every MPR-set change, from t = 0
    std::vector<RoutingTable> final_routes; // per node, at end of run
};

struct SimParams {
    OlsrConfig olsr;
    MetricKind metric = MetricKind::Etx;
    double duration = 900.0;
    std::uint64_t seed = 1;

    /// Statistics before this time are not counted; the experiment harness
    /// also starts flows here so routing has converged before measurement.
    double warmup = 50.0;

    double link_rate_bps = 1e6;      // transmit-queue service rate
    double propagation_delay_s = 1e-6;
    std::size_t queue_capacity = 50; // per-node transmit queue, tail-drop
    bool control_jitter = true;      // uniform [0, 0.1*interval] per emission
    unsigned data_ttl = 32;
    double route_debounce_s = 0.1;   // min spacing of per-node route recomputation

    std::ostream* trace = nullptr;   // one line per event: `t kind node detail`
    SimArtifacts* artifacts = nullptr;
};

constexpr int kDataPacketBytes = 64;
constexpr int kProbePacketBytes = 134;

struct SimStats {
    // data plane
    std::uint64_t data_sent = 0;
    std::uint64_t data_delivered = 0;
    std::uint64_t data_tx = 0; // link transmissions of data packets
    double latency_sum = 0.0;  // seconds, over delivered data packets
    std::uint64_t bytes_delivered = 0;
    std::uint64_t drop_no_route = 0;
    std::uint64_t drop_ttl = 0;
    std::uint64_t drop_queue = 0;     // tail-drop of data at a full transmit queue
    std::uint64_t drop_link_loss = 0; // data lost to the channel
    std::uint64_t data_in_flight_at_end = 0;

    // control plane, transmissions (forwards included)
    std::uint64_t hello_tx = 0;
    std::uint64_t tc_default_tx = 0;   // interval-driven originations
    std::uint64_t tc_triggered_tx = 0; // MPR-change originations
    std::uint64_t tc_forward_tx = 0;   // relayed flood copies
    std::uint64_t probe_tx = 0;
    std::uint64_t control_queue_drops = 0;

    // control plane, receptions
    std::uint64_t hello_rx = 0;
    std::uint64_t tc_rx = 0;
    std::uint64_t probe_rx = 0;
    // receptions of TC copies straight from their origin (no relay between),
    // split by cadence; these are what the analytical reception costs count
    std::uint64_t tc_default_first_hop_rx = 0;
    std::uint64_t tc_triggered_first_hop_rx = 0;

    // control dissemination latency, accumulated per class
    double periodic_latency_sum = 0.0; // HELLO + interval TCs
    std::uint64_t periodic_latency_count = 0;
    double triggered_latency_sum = 0.0;
    std::uint64_t triggered_latency_count = 0;
    double probe_latency_sum = 0.0;
    std::uint64_t probe_latency_count = 0;

    std::uint64_t routing_packets_transmitted() const {
        return hello_tx + tc_default_tx + tc_triggered_tx + tc_forward_tx + probe_tx;
    }
    std::uint64_t data_drops() const {
        return drop_no_route + drop_ttl + drop_queue + drop_link_loss;
    }

    bool operator==(const SimStats&) const = default;
};

/// Runs the event loop over [0, duration). Identical inputs and seed give
/// a bit-identical SimStats (and identical trace output).
SimStats run_simulation(const Topology& topology, const SimParams& params,
                        std::span<const CbrFlow> flows);

enum class Direction { Forward, Reverse };

/// One seeded channel draw; the draw is consumed whether or not the packet
/// is delivered so loss never perturbs the stream.
bool transmit_succeeds(const LinkQuality& link, Direction direction, Rng& rng);

double transmission_delay(int size_bytes, double link_rate_bps);

struct Performance {
    double throughput = 0.0;        // delivered data packets per second
    std::optional<double> e2ed;     // mean end-to-end delay, undefined if nothing delivered
    std::optional<double> nrl;      // routing transmissions per delivered packet
};

Performance finalize_stats(const SimStats& stats, double duration);

/// Draws `count` distinct (src, dst) pairs without replacement, src != dst,
/// from a generator seeded as given. Flow i starts at
/// start + (i/count)/rate so emissions are staggered within one period.
std::vector<CbrFlow> make_random_flows(std::size_t count, std::size_t node_count, double rate,
                                       double start, double stop, std::uint64_t seed);

} // namespace mhop
