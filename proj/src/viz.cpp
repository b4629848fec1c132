#include "ganlab/viz.hpp"

#include "ganlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ganlab {

double quad_area(const Point2& a, const Point2& b, const Point2& c, const Point2& d)
{
    const double twice = (a[0] * b[1] - b[0] * a[1]) + (b[0] * c[1] - c[0] * b[1]) +
                         (c[0] * d[1] - d[0] * c[1]) + (d[0] * a[1] - a[0] * d[1]);
    return 0.5 * std::abs(twice);
}

double quad_area(const std::array<Point2, 4>& corners)
{
    return quad_area(corners[0], corners[1], corners[2], corners[3]);
}

double noise_axis_mass(NoiseDistribution dist, double lo, double hi)
{
    if (dist == NoiseDistribution::uniform) {
        return std::max(0.0, std::min(hi, 1.0) - std::max(lo, 0.0));
    }
    // Clamped normal: everything below 0 sits at 0, everything above 1 at 1.
    auto cdf = [](double x) {
        if (x <= 0.0) {
            return 0.0;
        }
        if (x >= 1.0) {
            return 1.0;
        }
        const double z = (x - kGaussianNoiseMean) / kGaussianNoiseStddev;
        return 0.5 * std::erfc(-z / std::numbers::sqrt2);
    };
    return std::max(0.0, cdf(hi) - cdf(lo));
}

ManifoldGrid compute_manifold(const NoiseMap& map, const NoiseSpec& noise, int resolution)
{
    if (resolution < 2) {
        throw ContractError("manifold resolution must be at least 2");
    }
    if (noise.dim != 1 && noise.dim != 2) {
        throw ConfigError("noise dimension must be 1 or 2");
    }
    const int r = resolution;
    const int side = r + 1;
    const double step = 1.0 / r;

    ManifoldGrid grid;
    grid.resolution = r;
    grid.noise_dim = noise.dim;

    const int n_corners = noise.dim == 2 ? side * side : side;
    nn::Batch inputs(n_corners, noise.dim);
    if (noise.dim == 2) {
        for (int i = 0; i < side; ++i) {
            for (int j = 0; j < side; ++j) {
                inputs(i * side + j, 0) = static_cast<double>(i) / r;
                inputs(i * side + j, 1) = static_cast<double>(j) / r;
            }
        }
    } else {
        for (int i = 0; i < side; ++i) {
            inputs(i, 0) = static_cast<double>(i) / r;
        }
    }

    const nn::Batch outputs = map(inputs);
    if (outputs.rows() != n_corners || outputs.cols() != 2) {
        throw ShapeError("manifold map must return one 2D point per corner");
    }
    if (!outputs.allFinite()) {
        throw NumericalError("manifold map returned a non-finite point");
    }
    grid.corners.resize(n_corners);
    for (int k = 0; k < n_corners; ++k) {
        grid.corners[k] = {outputs(k, 0), outputs(k, 1)};
    }

    std::vector<double> axis_mass(r);
    for (int i = 0; i < r; ++i) {
        axis_mass[i] = noise_axis_mass(noise.dist, i * step, (i + 1) * step);
    }
    // The last cell is closed on the right so that the upper boundary mass of
    // the clamped Gaussian is not lost to floating-point rounding of r * step.
    axis_mass[r - 1] = noise_axis_mass(noise.dist, (r - 1) * step, 2.0);
    axis_mass[0] = noise_axis_mass(noise.dist, -1.0, step);

    const int cells = grid.cell_count();
    grid.cell_mass.resize(cells);
    grid.cell_density.resize(cells);
    grid.cell_flags.resize(cells);
    for (int i = 0; i < grid.cell_rows(); ++i) {
        for (int j = 0; j < r; ++j) {
            double mass = 0.0;
            double extent = 0.0;
            if (noise.dim == 2) {
                mass = axis_mass[i] * axis_mass[j];
                extent = quad_area(grid.corner(i, j), grid.corner(i + 1, j),
                                   grid.corner(i + 1, j + 1), grid.corner(i, j + 1));
            } else {
                mass = axis_mass[j];
                const auto& a = grid.corners[j];
                const auto& b = grid.corners[j + 1];
                extent = std::hypot(b[0] - a[0], b[1] - a[1]);
            }
            const int idx = i * r + j;
            grid.cell_mass[idx] = mass;
            grid.cell_flags[idx] = extent < kMinQuadArea;
            grid.cell_density[idx] = mass / std::max(extent, kMinQuadArea);
        }
    }
    return grid;
}

ManifoldGrid compute_manifold(const nn::MlpModel& generator, const NoiseSpec& noise,
                              int resolution)
{
    if (generator.input_width() != noise.dim || generator.output_width() != 2) {
        throw ShapeError("generator does not map the noise space to 2D");
    }
    return compute_manifold([&](const nn::Batch& z) { return nn::predict(generator, z); }, noise,
                            resolution);
}

Heatmap compute_heatmap(const nn::MlpModel& discriminator, int resolution)
{
    if (resolution < 1) {
        throw ContractError("heatmap resolution must be positive");
    }
    if (discriminator.input_width() != 2 || discriminator.output_width() != 1) {
        throw ShapeError("discriminator must map 2D points to one score");
    }
    const int res = resolution;
    nn::Batch centers(res * res, 2);
    for (int row = 0; row < res; ++row) {
        for (int col = 0; col < res; ++col) {
            centers(row * res + col, 0) = (col + 0.5) / res;
            centers(row * res + col, 1) = (row + 0.5) / res;
        }
    }
    const nn::Batch scores = nn::predict(discriminator, centers);
    Heatmap map;
    map.resolution = res;
    map.scores.assign(scores.data(), scores.data() + scores.size());
    return map;
}

DensityGrid density_grid(const nn::Batch& samples, int resolution)
{
    if (samples.rows() == 0) {
        throw ContractError("density grid needs at least one sample");
    }
    if (samples.cols() != 2) {
        throw ShapeError("density grid expects 2D samples");
    }
    if (resolution < 1) {
        throw ContractError("density resolution must be positive");
    }
    DensityGrid grid;
    grid.resolution = resolution;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(resolution) * resolution, 0);
    std::int64_t total = 0;
    auto bin = [resolution](double v) {
        return std::min(static_cast<int>(v * resolution), resolution - 1);
    };
    for (Eigen::Index k = 0; k < samples.rows(); ++k) {
        const double x = samples(k, 0);
        const double y = samples(k, 1);
        if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
            continue;
        }
        ++counts[bin(y) * resolution + bin(x)];
        ++total;
    }
    grid.mass.assign(counts.size(), 0.0);
    if (total > 0) {
        for (std::size_t c = 0; c < counts.size(); ++c) {
            grid.mass[c] = static_cast<double>(counts[c]) / static_cast<double>(total);
        }
    }
    return grid;
}

} // namespace ganlab
