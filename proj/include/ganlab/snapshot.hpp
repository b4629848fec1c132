#pragma once

#include "ganlab/gan.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/viz.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ganlab {

// One visualization frame. Everything a client needs to draw all views is in
// here; no frame depends on an earlier one.
struct TrainingSnapshot {
    std::int64_t epoch = 0;
    std::string mode;         // session mode, "headless" for CLI runs
    std::string distribution; // distribution kind name

    std::vector<Point2> real_samples;
    std::vector<Point2> fake_samples;
    std::vector<double> real_scores;
    std::vector<double> fake_scores;
    std::vector<Point2> fake_sample_movements;

    ManifoldGrid manifold;
    Heatmap heatmap;
    DensityGrid real_density;
    DensityGrid fake_density;
    MetricsPoint metrics;

    std::optional<PhaseTag> slow_phase;
    GanConfig config;

    bool operator==(const TrainingSnapshot&) const = default;
};

// Human-readable list of broken payload invariants; empty for a valid frame.
std::vector<std::string> snapshot_violations(const TrainingSnapshot& snapshot);

} // namespace ganlab
