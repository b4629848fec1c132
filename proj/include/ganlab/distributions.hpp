#pragma once

// Sources of real samples over the unit square: five presets plus a kernel
// density resampler for hand-drawn point sets.

#include "ganlab/nn.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace ganlab {

using Rng = std::mt19937_64;
using Point2 = std::array<double, 2>;

enum class DistributionKind { line, two_gaussians, ring, three_clusters, grid_blobs, drawn };

std::string_view to_string(DistributionKind kind);
// Throws ConfigError on unknown names.
DistributionKind parse_distribution_kind(std::string_view name);

inline constexpr std::size_t kMinDrawnPoints = 10;
inline constexpr double kDefaultDrawnJitter = 0.02;

struct Distribution {
    DistributionKind kind = DistributionKind::two_gaussians;
    std::vector<Point2> drawn_points; // only for kind == drawn
    double drawn_jitter = kDefaultDrawnJitter;

    bool operator==(const Distribution&) const = default;
};

// Preset geometry.
namespace presets {
inline constexpr Point2 kLineStart{0.2, 0.2};
inline constexpr Point2 kLineEnd{0.8, 0.8};
inline constexpr double kLineSigma = 0.03;

inline constexpr std::array<Point2, 2> kTwoGaussianCenters{{{0.3, 0.7}, {0.7, 0.4}}};
inline constexpr double kTwoGaussianSigma = 0.07;

inline constexpr Point2 kRingCenter{0.5, 0.5};
inline constexpr double kRingRadius = 0.3;
inline constexpr double kRingSigma = 0.03;

inline constexpr std::array<Point2, 3> kThreeClusterCenters{{{0.25, 0.25}, {0.75, 0.3}, {0.5, 0.8}}};
inline constexpr double kThreeClusterSigma = 0.05;

inline constexpr std::array<Point2, 4> kGridBlobCenters{{{0.3, 0.3}, {0.7, 0.3}, {0.3, 0.7}, {0.7, 0.7}}};
inline constexpr double kGridBlobSigma = 0.04;
} // namespace presets

Distribution make_preset(DistributionKind kind);

// Validates the point set (count and range) and builds a drawn distribution.
// Out-of-range points are reported by index.
Distribution from_drawn_points(std::vector<Point2> points, double jitter = kDefaultDrawnJitter);

// n x 2 batch of i.i.d. samples, clamped to [0,1]^2.
nn::Batch sample_real(const Distribution& dist, int n, Rng& rng);

// Plain-text point list: one "x y" pair per line. Blank lines and lines
// starting with '#' are skipped.
std::vector<Point2> read_points(std::istream& in);
void write_points(std::ostream& out, const std::vector<Point2>& points);

} // namespace ganlab
