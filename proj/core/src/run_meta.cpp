#include "mhopsim/run_meta.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace mhop {

namespace {

using nlohmann::json;

json stats_to_json(const SimStats& s) {
    return json{{"data_sent", s.data_sent},
                {"data_delivered", s.data_delivered},
                {"data_tx", s.data_tx},
                {"latency_sum", s.latency_sum},
                {"bytes_delivered", s.bytes_delivered},
                {"drop_no_route", s.drop_no_route},
                {"drop_ttl", s.drop_ttl},
                {"drop_queue", s.drop_queue},
                {"drop_link_loss", s.drop_link_loss},
                {"data_in_flight_at_end", s.data_in_flight_at_end},
                {"hello_tx", s.hello_tx},
                {"tc_default_tx", s.tc_default_tx},
                {"tc_triggered_tx", s.tc_triggered_tx},
                {"tc_forward_tx", s.tc_forward_tx},
                {"probe_tx", s.probe_tx},
                {"control_queue_drops", s.control_queue_drops},
                {"hello_rx", s.hello_rx},
                {"tc_rx", s.tc_rx},
                {"probe_rx", s.probe_rx},
                {"tc_default_first_hop_rx", s.tc_default_first_hop_rx},
                {"tc_triggered_first_hop_rx", s.tc_triggered_first_hop_rx},
                {"periodic_latency_sum", s.periodic_latency_sum},
                {"periodic_latency_count", s.periodic_latency_count},
                {"triggered_latency_sum", s.triggered_latency_sum},
                {"triggered_latency_count", s.triggered_latency_count},
                {"probe_latency_sum", s.probe_latency_sum},
                {"probe_latency_count", s.probe_latency_count}};
}

SimStats stats_from_json(const json& j) {
    SimStats s;
    s.data_sent = j.at("data_sent");
    s.data_delivered = j.at("data_delivered");
    s.data_tx = j.at("data_tx");
    s.latency_sum = j.at("latency_sum");
    s.bytes_delivered = j.at("bytes_delivered");
    s.drop_no_route = j.at("drop_no_route");
    s.drop_ttl = j.at("drop_ttl");
    s.drop_queue = j.at("drop_queue");
    s.drop_link_loss = j.at("drop_link_loss");
    s.data_in_flight_at_end = j.at("data_in_flight_at_end");
    s.hello_tx = j.at("hello_tx");
    s.tc_default_tx = j.at("tc_default_tx");
    s.tc_triggered_tx = j.at("tc_triggered_tx");
    s.tc_forward_tx = j.at("tc_forward_tx");
    s.probe_tx = j.at("probe_tx");
    s.control_queue_drops = j.at("control_queue_drops");
    s.hello_rx = j.at("hello_rx");
    s.tc_rx = j.at("tc_rx");
    s.probe_rx = j.at("probe_rx");
    s.tc_default_first_hop_rx = j.at("tc_default_first_hop_rx");
    s.tc_triggered_first_hop_rx = j.at("tc_triggered_first_hop_rx");
    s.periodic_latency_sum = j.at("periodic_latency_sum");
    s.periodic_latency_count = j.at("periodic_latency_count");
    s.triggered_latency_sum = j.at("triggered_latency_sum");
    s.triggered_latency_count = j.at("triggered_latency_count");
    s.probe_latency_sum = j.at("probe_latency_sum");
    s.probe_latency_count = j.at("probe_latency_count");
    return s;
}

} // namespace

void save_run_meta(const RunMeta& meta, std::ostream& out) {
    json changes = json::array();
    for (const auto& c : meta.mpr_changes)
        changes.push_back(json{{"t", c.time}, {"node", c.node}, {"mpr_size", c.mpr_size}});

    json j{{"profile", meta.profile},
           {"metric", std::string(metric_name(meta.metric))},
           {"rate", meta.rate},
           {"seed", meta.seed},
           {"topology_seed_used", meta.topology_seed_used},
           {"duration", meta.duration},
           {"warmup", meta.warmup},
           {"control_jitter", meta.control_jitter},
           {"olsr",
            json{{"hello_interval", meta.olsr.hello_interval},
                 {"tc_interval", meta.olsr.tc_interval},
                 {"window_w", meta.olsr.window_w},
                 {"neighbor_hold_time", meta.olsr.neighbor_hold_time}}},
           {"counters", stats_to_json(meta.stats)},
           {"mpr_changes", std::move(changes)}};
    out << j.dump(2) << "\n";
}

RunMeta load_run_meta(std::istream& in) {
    json j = json::parse(in);
    RunMeta meta;
    meta.profile = j.at("profile");
    const auto metric = parse_metric(j.at("metric").get<std::string>());
    if (!metric) throw std::runtime_error("load_run_meta: unknown metric");
    meta.metric = *metric;
    meta.rate = j.at("rate");
    meta.seed = j.at("seed");
    meta.topology_seed_used = j.at("topology_seed_used");
    meta.duration = j.at("duration");
    meta.warmup = j.at("warmup");
    meta.control_jitter = j.at("control_jitter");
    const auto& o = j.at("olsr");
    meta.olsr.hello_interval = o.at("hello_interval");
    meta.olsr.tc_interval = o.at("tc_interval");
    meta.olsr.window_w = o.at("window_w");
    meta.olsr.neighbor_hold_time = o.at("neighbor_hold_time");
    meta.stats = stats_from_json(j.at("counters"));
    for (const auto& c : j.at("mpr_changes"))
        meta.mpr_changes.push_back({c.at("t"), c.at("node"), c.at("mpr_size")});
    return meta;
}

} // namespace mhop
