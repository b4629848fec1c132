#include "ganlab/metrics.hpp"

#include "ganlab/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

namespace ganlab {

namespace {

void require_matching(const DensityGrid& p, const DensityGrid& q)
{
    if (p.resolution != q.resolution || p.mass.size() != q.mass.size()) {
        throw ContractError("density grids have different resolutions");
    }
    const auto expected = static_cast<std::size_t>(p.resolution) * p.resolution;
    if (p.mass.size() != expected) {
        throw ContractError("density grid size does not match its resolution");
    }
}

} // namespace

double kl_divergence(const DensityGrid& p, const DensityGrid& q)
{
    require_matching(p, q);
    const std::size_t n = p.mass.size();

    std::size_t occupied = 0;
    std::size_t uncovered = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.mass[i] > 0.0) {
            ++occupied;
            if (q.mass[i] <= 0.0) {
                ++uncovered;
            }
        }
    }
    if (2 * uncovered > occupied) {
        return std::numeric_limits<double>::infinity();
    }

    std::vector<double> q_adj(q.mass);
    if (uncovered > 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.mass[i] > 0.0 && q_adj[i] <= 0.0) {
                q_adj[i] = kKlEpsilon;
            }
            total += q_adj[i];
        }
        for (auto& v : q_adj) {
            v /= total;
        }
    }

    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (p.mass[i] > 0.0) {
            kl += p.mass[i] * std::log(p.mass[i] / q_adj[i]);
        }
    }
    return kl;
}

double js_divergence(const DensityGrid& p, const DensityGrid& q)
{
    require_matching(p, q);
    double js = 0.0;
    for (std::size_t i = 0; i < p.mass.size(); ++i) {
        const double a = p.mass[i];
        const double b = q.mass[i];
        const double m = 0.5 * (a + b);
        const double ta = a > 0.0 ? 0.5 * a * std::log(a / m) : 0.0;
        const double tb = b > 0.0 ? 0.5 * b * std::log(b / m) : 0.0;
        js += ta + tb;
    }
    return std::clamp(js, 0.0, std::numbers::ln2);
}

MetricsPoint make_metrics_point(std::int64_t epoch, double d_loss, double g_loss,
                                const DensityGrid& real, const DensityGrid& fake)
{
    return {epoch, d_loss, g_loss, kl_divergence(real, fake), js_divergence(real, fake)};
}

MetricsHistory::MetricsHistory(std::size_t capacity) : capacity_(capacity)
{
    if (capacity_ == 0) {
        throw ContractError("history capacity must be positive");
    }
}

void MetricsHistory::record(const MetricsPoint& point)
{
    if (!points_.empty() && point.epoch <= points_.back().epoch) {
        throw ContractError(fmt::format("metrics epoch {} does not follow {}", point.epoch,
                                        points_.back().epoch));
    }
    points_.push_back(point);
    if (points_.size() > capacity_) {
        points_.pop_front();
    }
}

void write_metrics_header(std::ostream& out)
{
    out << "epoch,d_loss,g_loss,kl,js\n";
}

void write_metrics_row(std::ostream& out, const MetricsPoint& p)
{
    out << fmt::format("{},{},{},{},{}\n", p.epoch, p.d_loss, p.g_loss, p.kl, p.js);
}

void write_metrics_csv(std::ostream& out, const MetricsHistory& history)
{
    write_metrics_header(out);
    for (const auto& p : history.points()) {
        write_metrics_row(out, p);
    }
}

} // namespace ganlab
