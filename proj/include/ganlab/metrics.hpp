#pragma once

#include "ganlab/viz.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <limits>

namespace ganlab {

// Stand-in mass for real-occupied cells the fake grid misses.
inline constexpr double kKlEpsilon = 1e-6;
inline constexpr std::size_t kHistoryCapacity = 10'000;
inline constexpr int kMetricSamples = 1000;

// KL(p || q) in nats. Empty fake cells under real mass get kKlEpsilon before
// q is renormalized; when more than half of the real-occupied cells are empty
// in q the result is +infinity.
double kl_divergence(const DensityGrid& p, const DensityGrid& q);

// Jensen-Shannon divergence in nats, in [0, ln 2]. Symmetric bit for bit.
double js_divergence(const DensityGrid& p, const DensityGrid& q);

struct MetricsPoint {
    std::int64_t epoch = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double kl = 0.0; // may be +infinity
    double js = 0.0;

    bool operator==(const MetricsPoint&) const = default;
};

MetricsPoint make_metrics_point(std::int64_t epoch, double d_loss, double g_loss,
                                const DensityGrid& real, const DensityGrid& fake);

class MetricsHistory {
public:
    explicit MetricsHistory(std::size_t capacity = kHistoryCapacity);

    // Throws ContractError unless point.epoch exceeds the last recorded epoch.
    void record(const MetricsPoint& point);
    void clear() { points_.clear(); }

    const std::deque<MetricsPoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::deque<MetricsPoint> points_;
};

// CSV with header "epoch,d_loss,g_loss,kl,js"; values at round-trip precision,
// infinite KL written as "inf".
void write_metrics_csv(std::ostream& out, const MetricsHistory& history);
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const MetricsPoint& point);

} // namespace ganlab
