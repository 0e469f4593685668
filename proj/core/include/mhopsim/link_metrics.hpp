#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string_view>

namespace mhop {

/// The four pluggable route-quality metrics.
///   Etx    - expected transmission count, sum of 1/(fd*rd), lower is better
///   InvEtx - sum of fd*rd; fewest hops first, higher sum among equal-hop paths
///   Ml     - product of fd*rd (end-to-end success probability), higher is better
///   Md     - sum of probe-measured one-way link delays, lower is better
enum class MetricKind { Etx, InvEtx, Ml, Md };

std::optional<MetricKind> parse_metric(std::string_view name);
std::string_view metric_name(MetricKind kind);

/// Sliding window of control-message receipt times. Entries older than the
/// window are pruned on every read, and the expected count is fixed at
/// window / emission interval.
class HelloWindow {
public:
    HelloWindow() = default;
    HelloWindow(double window_seconds, double expected_count);

    /// Records a receipt. Timestamps must be non-decreasing.
    void record(double t);

    /// Drops receipts older than now - window.
    void prune(double now);

    /// Receipts within [now - window, now]; prunes first.
    int count(double now);

    double window_seconds() const { return window_seconds_; }
    double expected_count() const { return expected_count_; }
    const std::deque<double>& receipts() const { return receipts_; }

private:
    double window_seconds_ = 0.0;
    double expected_count_ = 0.0;
    std::deque<double> receipts_;
};

/// Fraction of expected messages actually received in the trailing window,
/// clamped to [0,1]. Rejects windows configured with expected_count <= 0.
double delivery_ratio(HelloWindow& window, double now);

/// What a node knows about one directed link: forward delivery ratio as
/// reported back by the far end, reverse ratio measured locally, and the
/// probe-measured one-way delay when the delay metric is active. A link
/// with fd*rd == 0 is unusable and excluded from routing.
struct LinkEstimate {
    double fd = 0.0;
    double rd = 0.0;
    std::optional<double> delay; // seconds, absent until first probe sample

    bool usable() const { return fd * rd > 0.0; }
    bool operator==(const LinkEstimate&) const = default;
};

struct PathCost {
    MetricKind kind = MetricKind::Etx;
    double value = 0.0;
    unsigned hops = 0;
    bool operator==(const PathCost&) const = default;
};

/// Sum of 1/(fd*rd) over the path. nullopt if any link is unusable.
std::optional<PathCost> etx_path(std::span<const LinkEstimate> links);

/// Sum of fd*rd over the path. nullopt if any link is unusable.
std::optional<PathCost> invetx_path(std::span<const LinkEstimate> links);

/// Product of fd*rd over the path; zero-quality links are allowed and
/// absorb the product to 0.
PathCost ml_path(std::span<const LinkEstimate> links);

/// Sum of per-link one-way delay estimates. nullopt until every link on
/// the path has at least one probe sample.
std::optional<PathCost> md_path(std::span<const LinkEstimate> links);

/// Exponentially weighted moving average of probe delay samples. The first
/// sample is adopted as-is; afterwards new = 0.7*current + 0.3*sample.
double update_delay_estimate(std::optional<double> current, double sample);

/// Strict "a is better than b" under one metric's ordering. Etx/Md prefer
/// the smaller value, Ml the larger, InvEtx fewer hops then the larger
/// value. Equal primary values fall back to fewer hops so perfect-link
/// graphs order by hop count under every metric. Mixed kinds are rejected.
bool better(MetricKind kind, const PathCost& a, const PathCost& b);

/// Neither a better than b nor b better than a.
bool equivalent_cost(MetricKind kind, const PathCost& a, const PathCost& b);

} // namespace mhop
