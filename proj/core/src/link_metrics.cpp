#include "mhopsim/link_metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace mhop {

std::optional<MetricKind> parse_metric(std::string_view name) {
    if (name == "etx") return MetricKind::Etx;
    if (name == "invetx") return MetricKind::InvEtx;
    if (name == "ml") return MetricKind::Ml;
    if (name == "md") return MetricKind::Md;
    return std::nullopt;
}

std::string_view metric_name(MetricKind kind) {
    switch (kind) {
    case MetricKind::Etx: return "etx";
    case MetricKind::InvEtx: return "invetx";
    case MetricKind::Ml: return "ml";
    case MetricKind::Md: return "md";
    }
    return "?";
}

HelloWindow::HelloWindow(double window_seconds, double expected_count)
    : window_seconds_(window_seconds), expected_count_(expected_count) {
    if (window_seconds <= 0.0)
        throw std::invalid_argument("HelloWindow: non-positive window");
}

void HelloWindow::record(double t) {
    if (!receipts_.empty() && t < receipts_.back())
        throw std::invalid_argument("HelloWindow: receipt timestamps must not decrease");
    receipts_.push_back(t);
}

void HelloWindow::prune(double now) {
    const double cutoff = now - window_seconds_;
    while (!receipts_.empty() && receipts_.front() < cutoff) receipts_.pop_front();
}

int HelloWindow::count(double now) {
    prune(now);
    int n = 0;
    for (double t : receipts_)
        if (t <= now) ++n;
    return n;
}

double delivery_ratio(HelloWindow& window, double now) {
    if (window.expected_count() <= 0.0)
        throw std::invalid_argument("delivery_ratio: expected_count must be positive");
    const double ratio = window.count(now) / window.expected_count();
    return std::clamp(ratio, 0.0, 1.0);
}

std::optional<PathCost> etx_path(std::span<const LinkEstimate> links) {
    double sum = 0.0;
    for (const auto& l : links) {
        if (!l.usable()) return std::nullopt;
        sum += 1.0 / (l.fd * l.rd);
    }
    return PathCost{MetricKind::Etx, sum, static_cast<unsigned>(links.size())};
}

std::optional<PathCost> invetx_path(std::span<const LinkEstimate> links) {
    double sum = 0.0;
    for (const auto& l : links) {
        if (!l.usable()) return std::nullopt;
        sum += l.fd * l.rd;
    }
    return PathCost{MetricKind::InvEtx, sum, static_cast<unsigned>(links.size())};
}

PathCost ml_path(std::span<const LinkEstimate> links) {
    double product = 1.0;
    for (const auto& l : links) product *= l.fd * l.rd;
    return PathCost{MetricKind::Ml, product, static_cast<unsigned>(links.size())};
}

std::optional<PathCost> md_path(std::span<const LinkEstimate> links) {
    double sum = 0.0;
    for (const auto& l : links) {
        if (!l.delay.has_value()) return std::nullopt;
        sum += *l.delay;
    }
    return PathCost{MetricKind::Md, sum, static_cast<unsigned>(links.size())};
}

double update_delay_estimate(std::optional<double> current, double sample) {
    if (sample < 0.0)
        throw std::invalid_argument("update_delay_estimate: negative sample");
    if (!current.has_value()) return sample;
    return 0.7 * *current + 0.3 * sample;
}

bool better(MetricKind kind, const PathCost& a, const PathCost& b) {
    if (a.kind != kind || b.kind != kind)
        throw std::invalid_argument("better: mixed metric kinds");
    switch (kind) {
    case MetricKind::Etx:
    case MetricKind::Md:
        if (a.value != b.value) return a.value < b.value;
        return a.hops < b.hops;
    case MetricKind::Ml:
        if (a.value != b.value) return a.value > b.value;
        return a.hops < b.hops;
    case MetricKind::InvEtx:
        if (a.hops != b.hops) return a.hops < b.hops;
        return a.value > b.value;
    }
    return false;
}

bool equivalent_cost(MetricKind kind, const PathCost& a, const PathCost& b) {
    return !better(kind, a, b) && !better(kind, b, a);
}

} // namespace mhop
