#include "mhopsim/overhead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

namespace mhop {

namespace {

double neighbor_sum(const Topology& topology) {
    double sum = 0.0;
    for (NodeId i = 0; i < topology.node_count(); ++i)
        sum += static_cast<double>(topology.neighbors(i).size());
    return sum;
}

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b));
}

} // namespace

double total_cost(const OverheadCosts& parts) { return parts.total(); }

double hello_cost(const Topology& topology, double tau_nl, double tau_hello) {
    if (tau_hello <= 0.0) throw std::invalid_argument("hello_cost: non-positive interval");
    if (tau_nl < 0.0) throw std::invalid_argument("hello_cost: negative lifetime");
    return (tau_nl / tau_hello) * neighbor_sum(topology);
}

double tc_trigger_cost(const MprChangeLog& log) {
    double cost = 0.0;
    for (const auto& change : log) cost += static_cast<double>(change.mpr_size);
    return cost;
}

double tc_default_cost(const Topology& topology, double tau_nl, double tc_interval) {
    if (tc_interval <= 0.0) throw std::invalid_argument("tc_default_cost: non-positive interval");
    if (tau_nl < 0.0) throw std::invalid_argument("tc_default_cost: negative lifetime");
    return (tau_nl / tc_interval) * neighbor_sum(topology);
}

double tc_default_cost_change_gated(const MprChangeLog& log, const Topology& topology,
                                    double tau_nl, double tc_interval) {
    if (tc_interval <= 0.0)
        throw std::invalid_argument("tc_default_cost_change_gated: non-positive interval");
    // Rounds in which each node's MPR set changed at least once.
    std::map<NodeId, std::set<long>> rounds;
    for (const auto& change : log) {
        if (change.time < 0.0 || change.time >= tau_nl) continue;
        rounds[change.node].insert(static_cast<long>(change.time / tc_interval));
    }
    double cost = 0.0;
    for (const auto& [node, rs] : rounds)
        cost += static_cast<double>(rs.size()) *
                static_cast<double>(topology.neighbors(node).size());
    return cost;
}

BudgetStatus check_budget(const EnergyCosts& energy, const LatencyCosts& latency,
                          double energy_budget, double latency_budget) {
    if (energy_budget <= 0.0 || latency_budget <= 0.0)
        throw std::invalid_argument("check_budget: budgets must be positive");
    const double e = energy.sum();
    const double t = latency.sum();
    if (nearly_equal(e, energy_budget) || nearly_equal(t, latency_budget))
        return BudgetStatus::Critical;
    if (e > energy_budget || t > latency_budget) return BudgetStatus::Infeasible;
    return BudgetStatus::Feasible;
}

double widest_path(const Topology& topology, NodeId source, NodeId sink) {
    const std::size_t n = topology.node_count();
    if (source >= n || sink >= n)
        throw std::invalid_argument("widest_path: endpoint out of range");
    if (source == sink) throw std::invalid_argument("widest_path: source equals sink");

    // Max-min relaxation: labels are bottleneck capacities, expanded in
    // decreasing order; ties broken by smaller node id for determinism.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> bottleneck(n, 0.0);
    std::vector<char> done(n, 0);
    bottleneck[source] = kInf;

    using Item = std::pair<double, NodeId>;
    auto worse = [](const Item& a, const Item& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(worse)> queue(worse);
    queue.push({kInf, source});

    while (!queue.empty()) {
        const auto [width, u] = queue.top();
        queue.pop();
        if (done[u]) continue;
        if (width != bottleneck[u]) continue;
        done[u] = 1;
        if (u == sink) break;
        for (const auto& nb : topology.neighbors(u)) {
            const double cand = std::min(width, nb.capacity);
            if (cand > bottleneck[nb.id]) {
                bottleneck[nb.id] = cand;
                queue.push({cand, nb.id});
            }
        }
    }
    return std::isinf(bottleneck[sink]) ? 0.0 : bottleneck[sink];
}

double max_efficiency(const EfficiencyProblem& problem) {
    if (!problem.topology) throw std::invalid_argument("max_efficiency: missing topology");
    if (check_budget(problem.energy, problem.latency, problem.energy_budget,
                     problem.latency_budget) != BudgetStatus::Feasible)
        return 0.0;
    return widest_path(*problem.topology, problem.source, problem.sink);
}

} // namespace mhop
