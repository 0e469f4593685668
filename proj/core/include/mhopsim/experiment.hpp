#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mhopsim/run_meta.hpp"
#include "mhopsim/sim.hpp"

namespace mhop {

/// The experiment matrix: every (profile, metric, rate) cell is run once
/// per topology seed and averaged.
struct MatrixConfig {
    std::vector<std::string> profiles{"olsr-default", "eolsr"};
    std::vector<MetricKind> metrics{MetricKind::Etx, MetricKind::InvEtx, MetricKind::Ml,
                                    MetricKind::Md};
    std::vector<double> rates{2, 4, 6, 8, 10, 12, 14, 16};
    std::vector<std::uint64_t> seeds{101, 102, 103, 104, 105};
    unsigned nodes = 50;
    double side = 1000.0;
    double range = 250.0;
    unsigned flows = 20;
    double duration = 900.0;
    double warmup = 50.0;
    double capacity = 100.0; // uniform link capacity, packets/s
    unsigned workers = 0;    // 0 = hardware concurrency
};

/// Flat key=value text, `#` comments; unknown keys are rejected.
MatrixConfig parse_matrix_config(std::istream& in);

struct RunSpec {
    std::string profile = "olsr-default";
    MetricKind metric = MetricKind::Etx;
    double rate = 2.0;
    std::uint64_t seed = 101;
    unsigned nodes = 50;
    double side = 1000.0;
    double range = 250.0;
    unsigned flows = 20;
    double duration = 900.0;
    double warmup = 50.0;
    double capacity = 100.0;
    bool control_jitter = true;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::uint64_t topology_seed_used = 0;
    SimStats stats;
    Performance perf;
};

/// One cell of the matrix with its per-seed outcomes and the arithmetic
/// means. Undefined per-seed values (nothing delivered) propagate to an
/// undefined mean rather than being treated as zero.
struct ResultRow {
    std::string profile;
    MetricKind metric = MetricKind::Etx;
    double rate = 0.0;
    std::vector<SeedOutcome> per_seed;
    double throughput_mean = 0.0;
    std::optional<double> e2ed_mean;
    std::optional<double> nrl_mean;
    bool failed = false;
    std::string error;
};

/// Executes one run end to end: profile lookup, connected-topology
/// generation (regenerating seed+1, ... when disconnected), seeded flow
/// selection, simulation, statistics.
SeedOutcome run_single(const RunSpec& spec, SimArtifacts* artifacts = nullptr);

RunMeta make_run_meta(const RunSpec& spec, const SeedOutcome& outcome,
                      const MprChangeLog& changes);

/// MHOP_SIM_WORKERS overrides the configured count; 0 falls back to
/// hardware concurrency.
unsigned resolve_worker_count(unsigned configured);

using MatrixProgress = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every cell of the matrix, cells and seeds dispatched over a worker
/// pool. Rows come back in deterministic (profile, metric, rate) order and
/// a failing run marks only its own row.
std::vector<ResultRow> run_matrix(const MatrixConfig& config,
                                  const MatrixProgress& progress = nullptr);

/// CSV with one row per matrix cell: means, per-seed values, drop
/// breakdown and control-message counts. 6 significant digits, undefined
/// cells rendered NA.
void emit_csv(std::span<const ResultRow> rows, std::ostream& out);

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
ParsedCsv parse_csv(std::istream& in);

enum class TrendStatus { Holds, Fails, Tie, Untestable };
std::string_view trend_status_name(TrendStatus status);

struct TrendCheck {
    std::string id;
    std::string description;
    TrendStatus status = TrendStatus::Untestable;
    std::string detail;
};

/// Sign of (eolsr - olsr) per metric and rate for each performance
/// parameter: -1, 0, +1; absent when either side is undefined.
struct ProfileDelta {
    MetricKind metric = MetricKind::Etx;
    double rate = 0.0;
    std::optional<int> throughput_sign;
    std::optional<int> e2ed_sign;
    std::optional<int> nrl_sign;
};

struct TrendReport {
    std::vector<TrendCheck> checks;
    std::vector<ProfileDelta> deltas;

    int holds_count() const;
    /// The comparison suite passes when at least 4 of the 5 trends hold.
    bool pass() const { return holds_count() >= 4; }
};

TrendReport compare_profiles(std::span<const ResultRow> rows);
std::string format_trend_report(const TrendReport& report);
std::string trend_report_json(const TrendReport& report);

} // namespace mhop
