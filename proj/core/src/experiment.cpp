#include "mhopsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "mhopsim/topology.hpp"

namespace mhop {

namespace {

constexpr std::uint64_t kFlowSeedTag = 0xF1;

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        // trim
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

} // namespace

MatrixConfig parse_matrix_config(std::istream& in) {
    MatrixConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            const auto y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "profiles") {
            cfg.profiles = split_list(value);
            for (const auto& p : cfg.profiles)
                if (!OlsrConfig::profile(p))
                    throw std::runtime_error("config: unknown profile '" + p + "'");
        } else if (key == "metrics") {
            cfg.metrics.clear();
            for (const auto& m : split_list(value)) {
                const auto kind = parse_metric(m);
                if (!kind) throw std::runtime_error("config: unknown metric '" + m + "'");
                cfg.metrics.push_back(*kind);
            }
        } else if (key == "rates") {
            cfg.rates.clear();
            for (const auto& r : split_list(value)) cfg.rates.push_back(std::stod(r));
        } else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
        } else if (key == "nodes") {
            cfg.nodes = static_cast<unsigned>(std::stoul(value));
        } else if (key == "side") {
            cfg.side = std::stod(value);
        } else if (key == "range") {
            cfg.range = std::stod(value);
        } else if (key == "flows") {
            cfg.flows = static_cast<unsigned>(std::stoul(value));
        } else if (key == "duration") {
            cfg.duration = std::stod(value);
        } else if (key == "warmup") {
            cfg.warmup = std::stod(value);
        } else if (key == "capacity") {
            cfg.capacity = std::stod(value);
        } else if (key == "workers") {
            cfg.workers = static_cast<unsigned>(std::stoul(value));
        } else {
            throw std::runtime_error("config: unknown key '" + key + "'");
        }
    }
    if (cfg.profiles.empty() || cfg.metrics.empty() || cfg.rates.empty() || cfg.seeds.empty())
        throw std::runtime_error("config: profiles, metrics, rates and seeds must be non-empty");
    return cfg;
}

SeedOutcome run_single(const RunSpec& spec, SimArtifacts* artifacts) {
    const auto olsr = OlsrConfig::profile(spec.profile);
    if (!olsr) throw std::invalid_argument("run_single: unknown profile '" + spec.profile + "'");

    const auto connected =
        generate_connected_topology(spec.nodes, spec.side, spec.range, spec.seed, spec.capacity);
    const auto flows =
        make_random_flows(spec.flows, spec.nodes, spec.rate, spec.warmup, spec.duration,
                          derive_seed(spec.seed, kFlowSeedTag));

    SimParams params;
    params.olsr = *olsr;
    params.metric = spec.metric;
    params.duration = spec.duration;
    params.warmup = spec.warmup;
    params.seed = spec.seed;
    params.control_jitter = spec.control_jitter;
    params.artifacts = artifacts;

    SeedOutcome outcome;
    outcome.seed = spec.seed;
    outcome.topology_seed_used = connected.used_seed;
    outcome.stats = run_simulation(connected.topology, params, flows);
    outcome.perf = finalize_stats(outcome.stats, spec.duration);
    return outcome;
}

RunMeta make_run_meta(const RunSpec& spec, const SeedOutcome& outcome,
                      const MprChangeLog& changes) {
    RunMeta meta;
    meta.profile = spec.profile;
    meta.metric = spec.metric;
    meta.rate = spec.rate;
    meta.seed = spec.seed;
    meta.topology_seed_used = outcome.topology_seed_used;
    meta.duration = spec.duration;
    meta.warmup = spec.warmup;
    meta.control_jitter = spec.control_jitter;
    meta.olsr = *OlsrConfig::profile(spec.profile);
    meta.stats = outcome.stats;
    meta.mpr_changes = changes;
    return meta;
}

unsigned resolve_worker_count(unsigned configured) {
    if (const char* env = std::getenv("MHOP_SIM_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    if (configured > 0) return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

std::vector<ResultRow> run_matrix(const MatrixConfig& config, const MatrixProgress& progress) {
    struct Cell {
        std::string profile;
        MetricKind metric;
        double rate;
    };
    std::vector<Cell> cells;
    for (const auto& profile : config.profiles)
        for (const auto metric : config.metrics)
            for (const double rate : config.rates) cells.push_back({profile, metric, rate});

    const std::size_t seed_count = config.seeds.size();
    const std::size_t total = cells.size() * seed_count;
    std::vector<SeedOutcome> outcomes(total);
    std::vector<std::string> errors(total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> finished{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            const Cell& cell = cells[task / seed_count];
            RunSpec spec;
            spec.profile = cell.profile;
            spec.metric = cell.metric;
            spec.rate = cell.rate;
            spec.seed = config.seeds[task % seed_count];
            spec.nodes = config.nodes;
            spec.side = config.side;
            spec.range = config.range;
            spec.flows = config.flows;
            spec.duration = config.duration;
            spec.warmup = config.warmup;
            spec.capacity = config.capacity;
            try {
                outcomes[task] = run_single(spec);
            } catch (const std::exception& e) {
                errors[task] = e.what();
            }
            const std::size_t done = finished.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(done, total);
            }
        }
    };

    const unsigned workers = std::min<std::size_t>(resolve_worker_count(config.workers), total);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<ResultRow> rows;
    rows.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        ResultRow row;
        row.profile = cells[c].profile;
        row.metric = cells[c].metric;
        row.rate = cells[c].rate;
        double throughput_sum = 0.0, e2ed_sum = 0.0, nrl_sum = 0.0;
        bool e2ed_defined = true, nrl_defined = true;
        for (std::size_t s = 0; s < seed_count; ++s) {
            const std::size_t task = c * seed_count + s;
            if (!errors[task].empty()) {
                row.failed = true;
                row.error = errors[task];
                continue;
            }
            const SeedOutcome& outcome = outcomes[task];
            row.per_seed.push_back(outcome);
            throughput_sum += outcome.perf.throughput;
            if (outcome.perf.e2ed)
                e2ed_sum += *outcome.perf.e2ed;
            else
                e2ed_defined = false;
            if (outcome.perf.nrl)
                nrl_sum += *outcome.perf.nrl;
            else
                nrl_defined = false;
        }
        if (!row.failed && !row.per_seed.empty()) {
            const double n = static_cast<double>(row.per_seed.size());
            row.throughput_mean = throughput_sum / n;
            if (e2ed_defined) row.e2ed_mean = e2ed_sum / n;
            if (nrl_defined) row.nrl_mean = nrl_sum / n;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void emit_csv(std::span<const ResultRow> rows, std::ostream& out) {
    if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
    const std::size_t seed_count =
        std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.per_seed.size() < b.per_seed.size();
        })->per_seed.size();

    out << "profile,metric,rate,throughput_mean,e2ed_mean,nrl_mean";
    for (std::size_t s = 1; s <= seed_count; ++s)
        out << ",seed" << s << "_throughput,seed" << s << "_e2ed,seed" << s << "_nrl";
    out << ",drop_no_route_mean,drop_ttl_mean,drop_queue_mean,drop_link_loss_mean"
        << ",hello_tx_mean,tc_tx_mean,probe_tx_mean,data_sent_mean,data_delivered_mean\n";

    for (const auto& row : rows) {
        out << row.profile << "," << metric_name(row.metric) << "," << fmt6(row.rate);
        if (row.failed || row.per_seed.empty()) {
            const std::size_t numeric_cols = 3 + 3 * seed_count + 9;
            for (std::size_t i = 0; i < numeric_cols; ++i) out << ",NA";
            out << "\n";
            continue;
        }
        out << "," << fmt6(row.throughput_mean) << "," << fmt_opt(row.e2ed_mean) << ","
            << fmt_opt(row.nrl_mean);
        for (std::size_t s = 0; s < seed_count; ++s) {
            if (s < row.per_seed.size()) {
                const auto& perf = row.per_seed[s].perf;
                out << "," << fmt6(perf.throughput) << "," << fmt_opt(perf.e2ed) << ","
                    << fmt_opt(perf.nrl);
            } else {
                out << ",NA,NA,NA";
            }
        }
        const double n = static_cast<double>(row.per_seed.size());
        auto mean = [n](auto select, const ResultRow& r) {
            double sum = 0.0;
            for (const auto& seed : r.per_seed) sum += static_cast<double>(select(seed.stats));
            return sum / n;
        };
        out << "," << fmt6(mean([](const SimStats& s) { return s.drop_no_route; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.drop_ttl; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.drop_queue; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.drop_link_loss; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.hello_tx; }, row));
        out << ","
            << fmt6(mean(
                   [](const SimStats& s) {
                       return s.tc_default_tx + s.tc_triggered_tx + s.tc_forward_tx;
                   },
                   row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.probe_tx; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.data_sent; }, row));
        out << "," << fmt6(mean([](const SimStats& s) { return s.data_delivered; }, row));
        out << "\n";
    }
}

ParsedCsv parse_csv(std::istream& in) {
    ParsedCsv parsed;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (first) {
            parsed.header = std::move(fields);
            first = false;
        } else {
            parsed.rows.push_back(std::move(fields));
        }
    }
    return parsed;
}

std::string_view trend_status_name(TrendStatus status) {
    switch (status) {
    case TrendStatus::Holds: return "HOLDS";
    case TrendStatus::Fails: return "FAILS";
    case TrendStatus::Tie: return "TIE";
    case TrendStatus::Untestable: return "UNTESTABLE";
    }
    return "?";
}

int TrendReport::holds_count() const {
    int n = 0;
    for (const auto& c : checks)
        if (c.status == TrendStatus::Holds) ++n;
    return n;
}

namespace {

const ResultRow* find_row(std::span<const ResultRow> rows, std::string_view profile,
                          MetricKind metric, double rate) {
    for (const auto& row : rows)
        if (row.profile == profile && row.metric == metric && row.rate == rate && !row.failed)
            return &row;
    return nullptr;
}

std::vector<double> rates_present(std::span<const ResultRow> rows) {
    std::vector<double> rates;
    for (const auto& row : rows)
        if (std::find(rates.begin(), rates.end(), row.rate) == rates.end())
            rates.push_back(row.rate);
    std::sort(rates.begin(), rates.end());
    return rates;
}

constexpr MetricKind kAllMetrics[] = {MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml,
                                      MetricKind::Md};

std::optional<int> sign_of(std::optional<double> eolsr, std::optional<double> olsr) {
    if (!eolsr || !olsr) return std::nullopt;
    if (*eolsr < *olsr) return -1;
    if (*eolsr > *olsr) return 1;
    return 0;
}

} // namespace

TrendReport compare_profiles(std::span<const ResultRow> rows) {
    TrendReport report;
    const auto rates = rates_present(rows);

    for (const auto metric : kAllMetrics) {
        for (const double rate : rates) {
            const ResultRow* olsr = find_row(rows, "olsr-default", metric, rate);
            const ResultRow* eolsr = find_row(rows, "eolsr", metric, rate);
            if (!olsr || !eolsr) continue;
            ProfileDelta delta;
            delta.metric = metric;
            delta.rate = rate;
            delta.throughput_sign = sign_of(eolsr->throughput_mean, olsr->throughput_mean);
            delta.e2ed_sign = sign_of(eolsr->e2ed_mean, olsr->e2ed_mean);
            delta.nrl_sign = sign_of(eolsr->nrl_mean, olsr->nrl_mean);
            report.deltas.push_back(delta);
        }
    }

    // (a) the enhanced profile carries less routing load at the top rate
    {
        TrendCheck check{"nrl-reduction",
                         "NRL(eolsr) < NRL(olsr-default) for every metric at rate 16",
                         TrendStatus::Untestable,
                         ""};
        std::string detail;
        bool testable = true, any_fail = false, any_tie = false;
        for (const auto metric : kAllMetrics) {
            const ResultRow* o = find_row(rows, "olsr-default", metric, 16.0);
            const ResultRow* e = find_row(rows, "eolsr", metric, 16.0);
            if (!o || !e || !o->nrl_mean || !e->nrl_mean) {
                testable = false;
                break;
            }
            detail += std::string(metric_name(metric)) + ": " + fmt6(*e->nrl_mean) + " vs " +
                      fmt6(*o->nrl_mean) + "; ";
            if (*e->nrl_mean > *o->nrl_mean)
                any_fail = true;
            else if (*e->nrl_mean == *o->nrl_mean)
                any_tie = true;
        }
        if (testable)
            check.status = any_fail   ? TrendStatus::Fails
                           : any_tie  ? TrendStatus::Tie
                                      : TrendStatus::Holds;
        check.detail = detail;
        report.checks.push_back(std::move(check));
    }

    // (b) the delay metric yields the lowest end-to-end delay at high load
    {
        TrendCheck check{"md-lowest-e2ed",
                         "E2ED(md) is the minimum of the four metrics under olsr-default at "
                         "every rate >= 8",
                         TrendStatus::Untestable,
                         ""};
        std::string detail;
        bool testable = false, ok = true;
        for (const double rate : rates) {
            if (rate < 8.0) continue;
            const ResultRow* md = find_row(rows, "olsr-default", MetricKind::Md, rate);
            if (!md || !md->e2ed_mean) {
                ok = false;
                testable = false;
                break;
            }
            bool rate_complete = true;
            for (const auto metric : kAllMetrics) {
                if (metric == MetricKind::Md) continue;
                const ResultRow* other = find_row(rows, "olsr-default", metric, rate);
                if (!other || !other->e2ed_mean) {
                    rate_complete = false;
                    break;
                }
                if (*md->e2ed_mean > *other->e2ed_mean) {
                    ok = false;
                    detail += "rate " + fmt6(rate) + ": md " + fmt6(*md->e2ed_mean) + " > " +
                              std::string(metric_name(metric)) + " " + fmt6(*other->e2ed_mean) +
                              "; ";
                }
            }
            if (rate_complete) testable = true;
        }
        if (testable) check.status = ok ? TrendStatus::Holds : TrendStatus::Fails;
        if (detail.empty()) detail = "md minimal at every tested rate";
        check.detail = detail;
        report.checks.push_back(std::move(check));
    }

    // (c) probing for delay costs the most routing load
    {
        TrendCheck check{"md-highest-nrl",
                         "NRL(md) is the maximum of the four metrics under olsr-default at "
                         "every rate",
                         TrendStatus::Untestable,
                         ""};
        std::string detail;
        bool testable = false, ok = true;
        for (const double rate : rates) {
            const ResultRow* md = find_row(rows, "olsr-default", MetricKind::Md, rate);
            if (!md || !md->nrl_mean) continue;
            bool rate_complete = true;
            for (const auto metric : kAllMetrics) {
                if (metric == MetricKind::Md) continue;
                const ResultRow* other = find_row(rows, "olsr-default", metric, rate);
                if (!other || !other->nrl_mean) {
                    rate_complete = false;
                    break;
                }
                if (*md->nrl_mean < *other->nrl_mean) {
                    ok = false;
                    detail += "rate " + fmt6(rate) + ": md " + fmt6(*md->nrl_mean) + " < " +
                              std::string(metric_name(metric)) + " " + fmt6(*other->nrl_mean) +
                              "; ";
                }
            }
            if (rate_complete) testable = true;
        }
        if (testable) check.status = ok ? TrendStatus::Holds : TrendStatus::Fails;
        if (detail.empty()) detail = "md maximal at every tested rate";
        check.detail = detail;
        report.checks.push_back(std::move(check));
    }

    // (d) preferring reliable paths beats transmission count on throughput
    {
        TrendCheck check{"ml-throughput",
                         "throughput(ml) >= throughput(etx) under olsr-default at every rate "
                         ">= 10",
                         TrendStatus::Untestable,
                         ""};
        std::string detail;
        bool testable = false, ok = true;
        for (const double rate : rates) {
            if (rate < 10.0) continue;
            const ResultRow* ml = find_row(rows, "olsr-default", MetricKind::Ml, rate);
            const ResultRow* etx = find_row(rows, "olsr-default", MetricKind::Etx, rate);
            if (!ml || !etx) continue;
            testable = true;
            detail += "rate " + fmt6(rate) + ": " + fmt6(ml->throughput_mean) + " vs " +
                      fmt6(etx->throughput_mean) + "; ";
            if (ml->throughput_mean < etx->throughput_mean) ok = false;
        }
        if (testable) check.status = ok ? TrendStatus::Holds : TrendStatus::Fails;
        check.detail = detail;
        report.checks.push_back(std::move(check));
    }

    // (e) the enhanced profile does not lose throughput at the top rate
    {
        TrendCheck check{"eolsr-throughput",
                         "throughput(eolsr) >= throughput(olsr-default) for every metric at "
                         "rate 16",
                         TrendStatus::Untestable,
                         ""};
        std::string detail;
        bool testable = true, ok = true;
        for (const auto metric : kAllMetrics) {
            const ResultRow* o = find_row(rows, "olsr-default", metric, 16.0);
            const ResultRow* e = find_row(rows, "eolsr", metric, 16.0);
            if (!o || !e) {
                testable = false;
                break;
            }
            detail += std::string(metric_name(metric)) + ": " + fmt6(e->throughput_mean) +
                      " vs " + fmt6(o->throughput_mean) + "; ";
            if (e->throughput_mean < o->throughput_mean) ok = false;
        }
        if (testable) check.status = ok ? TrendStatus::Holds : TrendStatus::Fails;
        check.detail = detail;
        report.checks.push_back(std::move(check));
    }

    return report;
}

std::string format_trend_report(const TrendReport& report) {
    std::ostringstream os;
    os << "trend comparison (eolsr vs olsr-default)\n";
    for (const auto& check : report.checks) {
        os << "  " << check.id << ": " << trend_status_name(check.status) << "\n"
           << "    " << check.description << "\n";
        if (!check.detail.empty()) os << "    " << check.detail << "\n";
    }
    os << "trends holding: " << report.holds_count() << "/" << report.checks.size()
       << (report.pass() ? " -> PASS" : " -> FAIL") << "\n";

    os << "\nper-cell sign of (eolsr - olsr-default), -1/0/+1:\n";
    os << "  metric rate throughput e2ed nrl\n";
    auto sign_str = [](const std::optional<int>& s) {
        if (!s) return std::string("NA");
        return *s > 0 ? std::string("+1") : (*s < 0 ? std::string("-1") : std::string("0"));
    };
    for (const auto& d : report.deltas) {
        os << "  " << metric_name(d.metric) << " " << fmt6(d.rate) << " "
           << sign_str(d.throughput_sign) << " " << sign_str(d.e2ed_sign) << " "
           << sign_str(d.nrl_sign) << "\n";
    }
    return os.str();
}

std::string trend_report_json(const TrendReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"id", c.id},
                          {"description", c.description},
                          {"status", std::string(trend_status_name(c.status))},
                          {"detail", c.detail}});
    nlohmann::json deltas = nlohmann::json::array();
    auto sign_json = [](const std::optional<int>& s) {
        return s ? nlohmann::json(*s) : nlohmann::json();
    };
    for (const auto& d : report.deltas)
        deltas.push_back({{"metric", std::string(metric_name(d.metric))},
                          {"rate", d.rate},
                          {"throughput_sign", sign_json(d.throughput_sign)},
                          {"e2ed_sign", sign_json(d.e2ed_sign)},
                          {"nrl_sign", sign_json(d.nrl_sign)}});
    nlohmann::json j{{"checks", std::move(checks)},
                     {"deltas", std::move(deltas)},
                     {"holds", report.holds_count()},
                     {"pass", report.pass()}};
    return j.dump(2);
}

} // namespace mhop
