#pragma once

#include <cstdint>

#include "mhopsim/sim.hpp"
#include "mhopsim/topology.hpp"

namespace mhop {

/// Control-message energy costs in message-transmission units (energy per
/// message normalized to 1).
struct OverheadCosts {
    double hello_cost = 0.0;
    double tc_trigger_cost = 0.0;
    double tc_default_cost = 0.0;

    double total() const { return hello_cost + tc_trigger_cost + tc_default_cost; }
};

double total_cost(const OverheadCosts& parts);

/// Network-wide HELLO reception cost over a lifetime: one unit per
/// neighbor per emission round, (tau_nl / tau_hello) * sum_i |Nbr(i)|.
double hello_cost(const Topology& topology, double tau_nl, double tau_hello);

/// Triggered-TC cost: each MPR-set change contributes the size of the new
/// set. The integral over the lifetime reduces to a sum over change
/// instants because MPR sets only change at discrete events.
double tc_trigger_cost(const MprChangeLog& log);

/// Interval-driven TC cost with unconditional emissions:
/// (tau_nl / tc_interval) * sum_i |Nbr(i)|.
double tc_default_cost(const Topology& topology, double tau_nl, double tc_interval);

/// Alternative reading where an interval round only costs for nodes whose
/// MPR set changed within that round. Kept selectable because the two
/// interpretations disagree; the unconditional one is the default.
double tc_default_cost_change_gated(const MprChangeLog& log, const Topology& topology,
                                    double tau_nl, double tc_interval);

struct EnergyCosts {
    double periodic = 0.0;
    double trigger = 0.0;
    double metric = 0.0;
    double sum() const { return periodic + trigger + metric; }
};

struct LatencyCosts {
    double periodic = 0.0;
    double trigger = 0.0;
    double metric = 0.0;
    double sum() const { return periodic + trigger + metric; }
};

enum class BudgetStatus { Feasible, Critical, Infeasible };

/// Feasible when both cost sums are strictly below their budgets, Critical
/// when either equals its budget within 1e-9 relative tolerance,
/// Infeasible when either is strictly above.
BudgetStatus check_budget(const EnergyCosts& energy, const LatencyCosts& latency,
                          double energy_budget, double latency_budget);

struct EfficiencyProblem {
    const Topology* topology = nullptr;
    NodeId source = 0;
    NodeId sink = 0;
    double energy_budget = 0.0;  // beta_cri
    double latency_budget = 0.0; // tau_cri
    EnergyCosts energy;
    LatencyCosts latency;
};

/// Bottleneck capacity of the best single source-sink path: the maximum
/// over paths of the minimum link capacity along the path. 0 if no path.
double widest_path(const Topology& topology, NodeId source, NodeId sink);

/// Efficiency under the single-path flow model: the widest-path capacity
/// when both overhead budgets hold strictly, 0 when either budget is met
/// at equality or exceeded, or when no path exists.
double max_efficiency(const EfficiencyProblem& problem);

} // namespace mhop
