#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "mhopsim/olsr.hpp"
#include "mhopsim/sim.hpp"

namespace mhop {

/// Everything a finished run needs to be analyzed offline: the scenario
/// identity, the intervals actually used, the regeneration-adjusted
/// topology seed, all counters, and the MPR change log.
struct RunMeta {
    std::string profile;
    MetricKind metric = MetricKind::Etx;
    double rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t topology_seed_used = 0;
    double duration = 0.0;
    double warmup = 0.0;
    bool control_jitter = true;
    OlsrConfig olsr;
    SimStats stats;
    MprChangeLog mpr_changes;
};

void save_run_meta(const RunMeta& meta, std::ostream& out);
RunMeta load_run_meta(std::istream& in);

} // namespace mhop
