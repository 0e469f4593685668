// Command line front end: single runs, the full experiment matrix, offline
// overhead analysis and topology generation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mhopsim/experiment.hpp"
#include "mhopsim/overhead.hpp"
#include "mhopsim/run_meta.hpp"
#include "mhopsim/sim.hpp"
#include "mhopsim/topology.hpp"

namespace {

using namespace mhop;

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

Topology load_topology_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open topology file: " + path);
    return load_topology(in);
}

void print_stats(const SeedOutcome& outcome, const RunSpec& spec) {
    const SimStats& s = outcome.stats;
    std::cout << "profile=" << spec.profile << " metric=" << metric_name(spec.metric)
              << " rate=" << fmt6(spec.rate) << " seed=" << spec.seed
              << " topology_seed_used=" << outcome.topology_seed_used << "\n";
    std::cout << "nodes=" << spec.nodes << " flows=" << spec.flows
              << " duration=" << fmt6(spec.duration) << " warmup=" << fmt6(spec.warmup) << "\n";
    std::cout << "data_sent=" << s.data_sent << " data_delivered=" << s.data_delivered
              << " throughput=" << fmt6(outcome.perf.throughput)
              << " e2ed=" << fmt_opt(outcome.perf.e2ed) << " nrl=" << fmt_opt(outcome.perf.nrl)
              << "\n";
    std::cout << "drops: no_route=" << s.drop_no_route << " ttl=" << s.drop_ttl
              << " queue=" << s.drop_queue << " link_loss=" << s.drop_link_loss
              << " in_flight_at_end=" << s.data_in_flight_at_end << "\n";
    std::cout << "control_tx: hello=" << s.hello_tx << " tc_default=" << s.tc_default_tx
              << " tc_triggered=" << s.tc_triggered_tx << " tc_forward=" << s.tc_forward_tx
              << " probe=" << s.probe_tx
              << " routing_total=" << s.routing_packets_transmitted() << "\n";
    std::cout << "control_rx: hello=" << s.hello_rx << " tc=" << s.tc_rx
              << " probe=" << s.probe_rx << "\n";
}

int cmd_simulate(const RunSpec& spec, bool want_trace, const std::string& trace_path,
                 const std::string& run_meta_path, const std::string& dump_routes_path,
                 const std::string& topology_path) {
    SimArtifacts artifacts;
    SeedOutcome outcome;

    std::ofstream trace_file;
    std::ostream* trace_out = nullptr;
    if (want_trace) {
        if (trace_path.empty()) {
            trace_out = &std::cout;
        } else {
            trace_file.open(trace_path);
            if (!trace_file) throw std::runtime_error("cannot open trace file: " + trace_path);
            trace_out = &trace_file;
        }
    }

    if (topology_path.empty() && !trace_out) {
        outcome = run_single(spec, &artifacts);
    } else {
        // Replay / trace path, assembled by hand so a topology file can be
        // substituted for the generator.
        const auto olsr = OlsrConfig::profile(spec.profile);
        if (!olsr) throw std::runtime_error("unknown profile: " + spec.profile);
        Topology topo;
        std::uint64_t used_seed = spec.seed;
        if (!topology_path.empty()) {
            topo = load_topology_file(topology_path);
        } else {
            auto connected = generate_connected_topology(spec.nodes, spec.side, spec.range,
                                                         spec.seed, spec.capacity);
            topo = std::move(connected.topology);
            used_seed = connected.used_seed;
        }
        const auto flows =
            make_random_flows(spec.flows, topo.node_count(), spec.rate, spec.warmup,
                              spec.duration, derive_seed(spec.seed, 0xF1));
        SimParams params;
        params.olsr = *olsr;
        params.metric = spec.metric;
        params.duration = spec.duration;
        params.warmup = spec.warmup;
        params.seed = spec.seed;
        params.control_jitter = spec.control_jitter;
        params.trace = trace_out;
        params.artifacts = &artifacts;
        outcome.seed = spec.seed;
        outcome.topology_seed_used = used_seed;
        outcome.stats = run_simulation(topo, params, flows);
        outcome.perf = finalize_stats(outcome.stats, spec.duration);
    }

    print_stats(outcome, spec);

    if (!run_meta_path.empty()) {
        std::ofstream out(run_meta_path);
        if (!out) throw std::runtime_error("cannot open run-meta file: " + run_meta_path);
        save_run_meta(make_run_meta(spec, outcome, artifacts.mpr_changes), out);
        std::cout << "run metadata written to " << run_meta_path << "\n";
    }
    if (!dump_routes_path.empty()) {
        std::ofstream out(dump_routes_path);
        if (!out) throw std::runtime_error("cannot open routes file: " + dump_routes_path);
        dump_routing_tables(artifacts.final_routes, out);
        std::cout << "routing tables written to " << dump_routes_path << "\n";
    }
    return 0;
}

int cmd_matrix(const std::string& config_path, const std::string& out_dir, unsigned workers,
               const std::vector<std::string>& profile_filter,
               const std::vector<std::string>& metric_filter,
               const std::vector<double>& rate_filter, bool quiet) {
    MatrixConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + config_path);
        cfg = parse_matrix_config(in);
    }
    if (workers > 0) cfg.workers = workers;
    if (!profile_filter.empty()) cfg.profiles = profile_filter;
    if (!metric_filter.empty()) {
        cfg.metrics.clear();
        for (const auto& m : metric_filter) {
            const auto kind = parse_metric(m);
            if (!kind) throw std::runtime_error("unknown metric: " + m);
            cfg.metrics.push_back(*kind);
        }
    }
    if (!rate_filter.empty()) cfg.rates = rate_filter;

    std::filesystem::create_directories(out_dir);

    MatrixProgress progress = nullptr;
    if (!quiet) {
        progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\rruns: %zu/%zu", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    }
    const auto rows = run_matrix(cfg, progress);

    const auto csv_path = std::filesystem::path(out_dir) / "results.csv";
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot open " + csv_path.string());
        emit_csv(rows, out);
    }
    const auto report = compare_profiles(rows);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "trends.txt");
        out << format_trend_report(report);
    }
    {
        std::ofstream out(std::filesystem::path(out_dir) / "trends.json");
        out << trend_report_json(report) << "\n";
    }
    std::cout << format_trend_report(report);
    std::cout << "results written to " << out_dir << "\n";
    return report.pass() ? 0 : 2;
}

int cmd_analyze(const std::string& topology_path, const std::string& run_meta_path,
                const std::string& csv_out, std::optional<NodeId> source,
                std::optional<NodeId> sink, std::optional<double> energy_budget,
                std::optional<double> latency_budget) {
    const Topology topo = load_topology_file(topology_path);
    std::ifstream meta_in(run_meta_path);
    if (!meta_in) throw std::runtime_error("cannot open run-meta file: " + run_meta_path);
    const RunMeta meta = load_run_meta(meta_in);

    const double tau_nl = meta.duration;
    OverheadCosts costs;
    costs.hello_cost = hello_cost(topo, tau_nl, meta.olsr.hello_interval);
    costs.tc_default_cost = tc_default_cost(topo, tau_nl, meta.olsr.tc_interval);
    costs.tc_trigger_cost = tc_trigger_cost(meta.mpr_changes);
    const double gated =
        tc_default_cost_change_gated(meta.mpr_changes, topo, tau_nl, meta.olsr.tc_interval);

    struct Row {
        const char* component;
        double analytical;
        double simulated;
    };
    const double n = static_cast<double>(topo.node_count());
    const Row rows[] = {
        {"hello_receptions", costs.hello_cost, static_cast<double>(meta.stats.hello_rx)},
        {"tc_default_first_hop_receptions", costs.tc_default_cost,
         static_cast<double>(meta.stats.tc_default_first_hop_rx)},
        {"tc_default_originations", (tau_nl / meta.olsr.tc_interval) * n,
         static_cast<double>(meta.stats.tc_default_tx)},
        {"tc_trigger_cost_units", costs.tc_trigger_cost,
         static_cast<double>(meta.stats.tc_triggered_tx)},
        {"total_cost_units", total_cost(costs),
         static_cast<double>(meta.stats.hello_rx + meta.stats.tc_default_first_hop_rx +
                             meta.stats.tc_triggered_tx)},
    };

    std::cout << "overhead report (interval reading: unconditional default TCs)\n";
    std::cout << "lifetime=" << fmt6(tau_nl) << " hello_interval=" << fmt6(meta.olsr.hello_interval)
              << " tc_interval=" << fmt6(meta.olsr.tc_interval) << "\n";
    std::cout << "component analytical simulated ratio\n";
    std::string csv = "component,analytical,simulated,ratio\n";
    for (const auto& row : rows) {
        const std::string ratio =
            row.simulated > 0 ? fmt6(row.analytical / row.simulated) : std::string("NA");
        std::cout << "  " << row.component << " " << fmt6(row.analytical) << " "
                  << fmt6(row.simulated) << " " << ratio << "\n";
        csv += std::string(row.component) + "," + fmt6(row.analytical) + "," +
               fmt6(row.simulated) + "," + ratio + "\n";
    }
    std::cout << "  tc_default_cost_change_gated " << fmt6(gated)
              << " (alternative change-gated reading)\n";
    csv += "tc_default_cost_change_gated," + fmt6(gated) + ",NA,NA\n";

    if (source && sink && energy_budget && latency_budget) {
        EfficiencyProblem problem;
        problem.topology = &topo;
        problem.source = *source;
        problem.sink = *sink;
        problem.energy_budget = *energy_budget;
        problem.latency_budget = *latency_budget;
        problem.energy = {costs.hello_cost + costs.tc_default_cost, costs.tc_trigger_cost,
                          static_cast<double>(meta.stats.probe_tx)};
        auto mean = [](double sum, std::uint64_t count) {
            return count > 0 ? sum / static_cast<double>(count) : 0.0;
        };
        problem.latency = {
            mean(meta.stats.periodic_latency_sum, meta.stats.periodic_latency_count),
            mean(meta.stats.triggered_latency_sum, meta.stats.triggered_latency_count),
            mean(meta.stats.probe_latency_sum, meta.stats.probe_latency_count)};
        const auto status = check_budget(problem.energy, problem.latency, problem.energy_budget,
                                         problem.latency_budget);
        const char* status_name = status == BudgetStatus::Feasible   ? "feasible"
                                  : status == BudgetStatus::Critical ? "critical"
                                                                     : "infeasible";
        const double e = max_efficiency(problem);
        std::cout << "budget_status=" << status_name << " efficiency=" << fmt6(e)
                  << " (bottleneck capacity " << *source << "->" << *sink << ")\n";
        csv += std::string("budget_status,") + status_name + ",,\n";
        csv += "efficiency," + fmt6(e) + ",,\n";
    }

    if (!csv_out.empty()) {
        std::ofstream out(csv_out);
        if (!out) throw std::runtime_error("cannot open " + csv_out);
        out << csv;
        std::cout << "csv written to " << csv_out << "\n";
    }
    return 0;
}

int cmd_gen_topology(unsigned nodes, double side, double range, std::uint64_t seed,
                     double capacity, bool connected, const std::string& out_path) {
    Topology topo;
    std::uint64_t used = seed;
    if (connected) {
        auto result = generate_connected_topology(nodes, side, range, seed, capacity);
        topo = std::move(result.topology);
        used = result.used_seed;
    } else {
        topo = generate_topology(nodes, side, range, seed, capacity);
    }
    if (out_path.empty()) {
        save_topology(topo, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open " + out_path);
        save_topology(topo, out);
    }
    std::cerr << "nodes=" << nodes << " links=" << topo.link_count() << " used_seed=" << used
              << " connected=" << (connectivity_check(topo) ? "yes" : "no") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-hop wireless network simulator with pluggable link metrics"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one scenario and print statistics");
    RunSpec spec;
    std::string metric_str = "etx";
    std::string trace_path, run_meta_path, dump_routes_path, topology_path;
    bool want_trace = false, no_jitter = false;
    sim->add_option("--profile", spec.profile, "olsr-default or eolsr")
        ->check(CLI::IsMember({"olsr-default", "eolsr"}));
    sim->add_option("--metric", metric_str, "etx, invetx, ml or md")
        ->check(CLI::IsMember({"etx", "invetx", "ml", "md"}));
    sim->add_option("--rate", spec.rate, "data packets per second per flow");
    sim->add_option("--seed", spec.seed, "topology / run seed");
    sim->add_option("--nodes", spec.nodes, "node count");
    sim->add_option("--side", spec.side, "area side, meters");
    sim->add_option("--range", spec.range, "radio range, meters");
    sim->add_option("--flows", spec.flows, "CBR flow count");
    sim->add_option("--duration", spec.duration, "simulated seconds");
    sim->add_option("--warmup", spec.warmup, "statistics exclusion window, seconds");
    sim->add_option("--capacity", spec.capacity, "uniform link capacity, packets/s");
    sim->add_flag("--trace", want_trace, "emit one line per event");
    sim->add_option("--trace-file", trace_path, "trace destination (default stdout)");
    sim->add_flag("--no-jitter", no_jitter, "disable control-message jitter");
    sim->add_option("--topology", topology_path, "replay a serialized topology file");
    sim->add_option("--run-meta", run_meta_path, "write run metadata JSON here");
    sim->add_option("--dump-routes", dump_routes_path, "write final routing tables here");

    // matrix
    auto* mat = app.add_subcommand("matrix", "run the experiment matrix and emit CSV + trends");
    std::string config_path, out_dir = "matrix-out";
    unsigned workers = 0;
    std::vector<std::string> profile_filter, metric_filter;
    std::vector<double> rate_filter;
    bool quiet = false;
    mat->add_option("--config", config_path, "key=value config file");
    mat->add_option("--out", out_dir, "output directory");
    mat->add_option("--workers", workers, "worker threads (MHOP_SIM_WORKERS overrides)");
    mat->add_option("--profile", profile_filter, "restrict to these profiles");
    mat->add_option("--metric", metric_filter, "restrict to these metrics");
    mat->add_option("--rate", rate_filter, "restrict to these rates");
    mat->add_flag("--quiet", quiet, "suppress progress output");

    // analyze
    auto* ana = app.add_subcommand("analyze", "overhead report from a topology and run metadata");
    std::string ana_topology, ana_meta, ana_csv;
    std::optional<NodeId> src, dst;
    std::optional<double> energy_budget, latency_budget;
    ana->add_option("--topology", ana_topology, "serialized topology file")->required();
    ana->add_option("--run-meta", ana_meta, "run metadata JSON")->required();
    ana->add_option("--out", ana_csv, "also write the report as CSV here");
    ana->add_option("--source", src, "efficiency source node");
    ana->add_option("--sink", dst, "efficiency sink node");
    ana->add_option("--energy-budget", energy_budget, "critical energy budget");
    ana->add_option("--latency-budget", latency_budget, "critical latency budget");

    // gen-topology
    auto* gen = app.add_subcommand("gen-topology", "generate and serialize a random topology");
    unsigned gen_nodes = 50;
    double gen_side = 1000, gen_range = 250, gen_capacity = 100;
    std::uint64_t gen_seed = 101;
    bool gen_connected = false;
    std::string gen_out;
    gen->add_option("--nodes", gen_nodes, "node count");
    gen->add_option("--side", gen_side, "area side, meters");
    gen->add_option("--range", gen_range, "radio range, meters");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--capacity", gen_capacity, "uniform link capacity, packets/s");
    gen->add_flag("--connected", gen_connected, "bump the seed until connected");
    gen->add_option("--out", gen_out, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            spec.metric = *mhop::parse_metric(metric_str);
            spec.control_jitter = !no_jitter;
            return cmd_simulate(spec, want_trace, trace_path, run_meta_path, dump_routes_path,
                                topology_path);
        }
        if (mat->parsed())
            return cmd_matrix(config_path, out_dir, workers, profile_filter, metric_filter,
                              rate_filter, quiet);
        if (ana->parsed())
            return cmd_analyze(ana_topology, ana_meta, ana_csv, src, dst, energy_budget,
                               latency_budget);
        if (gen->parsed())
            return cmd_gen_topology(gen_nodes, gen_side, gen_range, gen_seed, gen_capacity,
                                    gen_connected, gen_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
