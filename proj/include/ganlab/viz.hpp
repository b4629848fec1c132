#pragma once

// Visualization payloads: the generator manifold (warped noise grid with
// area-corrected density), the discriminator heatmap and sample density grids.
//
// Grids over [0,1]^2 are stored row-major with the row indexing y and the
// column indexing x: entry (row, col) covers
// [col/res, (col+1)/res) x [row/res, (row+1)/res).

#include "ganlab/distributions.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/nn.hpp"

#include <array>
#include <functional>
#include <vector>

namespace ganlab {

inline constexpr int kDefaultManifoldResolution = 20;
inline constexpr int kDefaultHeatmapResolution = 40;
inline constexpr int kDefaultDensityResolution = 20;
inline constexpr double kMinQuadArea = 1e-9;

// Warped noise grid. For 2D noise, corner (i, j) = map(i/R, j/R) is stored at
// corners[i * (R+1) + j] and cell (i, j) is the quadrangle
// (i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1), stored at index i * R + j.
//
// For 1D noise the grid is a single strip: corners[i] = map(i/R) for
// i = 0..R and cell i is the segment between corners i and i+1; its density
// is mass per unit length.
struct ManifoldGrid {
    int resolution = kDefaultManifoldResolution;
    int noise_dim = 2;
    std::vector<Point2> corners;
    std::vector<double> cell_mass;    // probability mass of each input cell
    std::vector<double> cell_density; // mass / transformed area (or length)
    std::vector<bool> cell_flags;     // true when the transformed cell is degenerate

    int cell_rows() const { return noise_dim == 2 ? resolution : 1; }
    int cell_count() const { return cell_rows() * resolution; }
    const Point2& corner(int i, int j) const { return corners[i * (resolution + 1) + j]; }

    bool operator==(const ManifoldGrid&) const = default;
};

struct Heatmap {
    int resolution = kDefaultHeatmapResolution;
    std::vector<double> scores; // row-major, see file comment

    bool operator==(const Heatmap&) const = default;
};

struct DensityGrid {
    int resolution = kDefaultDensityResolution;
    std::vector<double> mass; // row-major, see file comment

    double at(int row, int col) const { return mass[row * resolution + col]; }

    bool operator==(const DensityGrid&) const = default;
};

// Absolute shoelace area of the closed corner cycle a -> b -> c -> d.
double quad_area(const Point2& a, const Point2& b, const Point2& c, const Point2& d);
double quad_area(const std::array<Point2, 4>& corners);

// Probability mass the noise distribution assigns to [lo, hi) along one axis
// (the clamped Gaussian puts its tails on the boundary cells).
double noise_axis_mass(NoiseDistribution dist, double lo, double hi);

// Batched map from an n x noise_dim batch to an n x 2 batch.
using NoiseMap = std::function<nn::Batch(const nn::Batch&)>;

ManifoldGrid compute_manifold(const NoiseMap& map, const NoiseSpec& noise,
                              int resolution = kDefaultManifoldResolution);
ManifoldGrid compute_manifold(const nn::MlpModel& generator, const NoiseSpec& noise,
                              int resolution = kDefaultManifoldResolution);

Heatmap compute_heatmap(const nn::MlpModel& discriminator,
                        int resolution = kDefaultHeatmapResolution);

// Normalized 2D histogram. Points at exactly 1.0 land in the last cell;
// points outside [0,1]^2 are ignored.
DensityGrid density_grid(const nn::Batch& samples, int resolution = kDefaultDensityResolution);

} // namespace ganlab
