#include "ganlab/distributions.hpp"

#include "ganlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ganlab {

namespace {

double clamp01(double v)
{
    return std::clamp(v, 0.0, 1.0);
}

template <std::size_t N>
Point2 sample_mixture(const std::array<Point2, N>& centers, double sigma, Rng& rng,
                      std::normal_distribution<double>& normal)
{
    std::uniform_int_distribution<std::size_t> pick(0, N - 1);
    const Point2& c = centers[pick(rng)];
    const double x = c[0] + sigma * normal(rng);
    const double y = c[1] + sigma * normal(rng);
    return {x, y};
}

} // namespace

std::string_view to_string(DistributionKind kind)
{
    switch (kind) {
    case DistributionKind::line:
        return "line";
    case DistributionKind::two_gaussians:
        return "two_gaussians";
    case DistributionKind::ring:
        return "ring";
    case DistributionKind::three_clusters:
        return "three_clusters";
    case DistributionKind::grid_blobs:
        return "grid_blobs";
    case DistributionKind::drawn:
        return "drawn";
    }
    return "?";
}

DistributionKind parse_distribution_kind(std::string_view name)
{
    for (auto kind : {DistributionKind::line, DistributionKind::two_gaussians,
                      DistributionKind::ring, DistributionKind::three_clusters,
                      DistributionKind::grid_blobs, DistributionKind::drawn}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown distribution '" + std::string(name) + "'");
}

Distribution make_preset(DistributionKind kind)
{
    if (kind == DistributionKind::drawn) {
        throw ConfigError("drawn distributions need points; use from_drawn_points");
    }
    return Distribution{kind, {}, kDefaultDrawnJitter};
}

Distribution from_drawn_points(std::vector<Point2> points, double jitter)
{
    if (points.size() < kMinDrawnPoints) {
        throw ConfigError("drawn distribution needs at least " + std::to_string(kMinDrawnPoints) +
                          " points, got " + std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
            throw ConfigError("drawn point " + std::to_string(i) + " lies outside [0,1]^2");
        }
    }
    if (!(jitter > 0.0) || !std::isfinite(jitter)) {
        throw ConfigError("drawn jitter must be positive");
    }
    return Distribution{DistributionKind::drawn, std::move(points), jitter};
}

nn::Batch sample_real(const Distribution& dist, int n, Rng& rng)
{
    if (n < 1) {
        throw ContractError("sample count must be at least 1");
    }
    if (dist.kind == DistributionKind::drawn && dist.drawn_points.size() < kMinDrawnPoints) {
        throw ConfigError("drawn distribution needs at least " + std::to_string(kMinDrawnPoints) +
                          " points");
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    nn::Batch out(n, 2);
    for (int i = 0; i < n; ++i) {
        Point2 p{};
        switch (dist.kind) {
        case DistributionKind::line: {
            using namespace presets;
            const double t = unit(rng);
            p[0] = kLineStart[0] + t * (kLineEnd[0] - kLineStart[0]) + kLineSigma * normal(rng);
            p[1] = kLineStart[1] + t * (kLineEnd[1] - kLineStart[1]) + kLineSigma * normal(rng);
            break;
        }
        case DistributionKind::two_gaussians:
            p = sample_mixture(presets::kTwoGaussianCenters, presets::kTwoGaussianSigma, rng, normal);
            break;
        case DistributionKind::ring: {
            using namespace presets;
            const double angle = 2.0 * std::numbers::pi * unit(rng);
            // Radial jitter is truncated at 3 sigma so the ring has a hard width.
            double jitter = normal(rng);
            while (std::abs(jitter) > 3.0) {
                jitter = normal(rng);
            }
            const double r = kRingRadius + kRingSigma * jitter;
            p[0] = kRingCenter[0] + r * std::cos(angle);
            p[1] = kRingCenter[1] + r * std::sin(angle);
            break;
        }
        case DistributionKind::three_clusters:
            p = sample_mixture(presets::kThreeClusterCenters, presets::kThreeClusterSigma, rng,
                               normal);
            break;
        case DistributionKind::grid_blobs:
            p = sample_mixture(presets::kGridBlobCenters, presets::kGridBlobSigma, rng, normal);
            break;
        case DistributionKind::drawn: {
            std::uniform_int_distribution<std::size_t> pick(0, dist.drawn_points.size() - 1);
            const Point2& c = dist.drawn_points[pick(rng)];
            p[0] = c[0] + dist.drawn_jitter * normal(rng);
            p[1] = c[1] + dist.drawn_jitter * normal(rng);
            break;
        }
        }
        out(i, 0) = clamp01(p[0]);
        out(i, 1) = clamp01(p[1]);
    }
    return out;
}

std::vector<Point2> read_points(std::istream& in)
{
    std::vector<Point2> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::istringstream fields(line);
        Point2 p{};
        std::string rest;
        if (!(fields >> p[0] >> p[1]) || (fields >> rest)) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected \"x y\"");
        }
        if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
            throw ConfigError("line " + std::to_string(line_no) + ": point outside [0,1]^2");
        }
        points.push_back(p);
    }
    return points;
}

void write_points(std::ostream& out, const std::vector<Point2>& points)
{
    const auto old_precision = out.precision(17);
    for (const auto& p : points) {
        out << p[0] << ' ' << p[1] << '\n';
    }
    out.precision(old_precision);
}

} // namespace ganlab
