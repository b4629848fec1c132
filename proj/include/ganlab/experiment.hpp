#pragma once

// Owns one training run (model, data source, metrics history) and builds
// snapshots from it. The headless runner and the interactive session both
// drive training through this class, so identical seeds, configs and
// schedules give identical metric series.

#include "ganlab/distributions.hpp"
#include "ganlab/gan.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/snapshot.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace ganlab {

struct ViewOptions {
    int manifold_resolution = kDefaultManifoldResolution;
    int heatmap_resolution = kDefaultHeatmapResolution;
    int density_resolution = kDefaultDensityResolution;
    int metric_samples = kMetricSamples;
};

class Experiment {
public:
    Experiment(GanConfig config, Distribution distribution, std::uint64_t seed,
               ViewOptions views = {});

    const GanModel& model() const { return model_; }
    GanModel& model() { return model_; }
    const Distribution& distribution() const { return distribution_; }
    void set_distribution(Distribution distribution);
    std::uint64_t seed() const { return seed_; }
    const ViewOptions& views() const { return views_; }
    const MetricsHistory& history() const { return history_; }
    const std::optional<StepStats>& last_stats() const { return last_stats_; }

    // Fresh model from `seed` with the current config; history cleared.
    void reset(std::uint64_t seed);

    ConfigChangeEffect apply(const ConfigChange& change);

    StepStats train_epoch();
    StepStats train_epoch(Schedule schedule);
    // Used by slow-motion playback, which advances the epoch itself.
    void set_last_stats(StepStats stats) { last_stats_ = std::move(stats); }

    // Divergences on fresh draws plus the latest training losses. Draws come
    // from a generator seeded by (seed, epoch), so the result does not depend
    // on how many frames were built before. The sample batch shown in
    // snapshots is seeded by the run seed alone.
    MetricsPoint measure() const;

    TrainingSnapshot snapshot(const std::string& mode,
                              std::optional<PhaseTag> slow_phase = std::nullopt) const;

    // snapshot() plus recording its metrics point when the epoch is new.
    TrainingSnapshot emit(const std::string& mode,
                          std::optional<PhaseTag> slow_phase = std::nullopt);

    // measure() and record, without building the visual payloads. Records the
    // same point emit() would.
    MetricsPoint record_metrics();

private:
    Rng view_rng(std::uint64_t stream, bool per_epoch) const;

    struct Densities {
        DensityGrid real;
        DensityGrid fake;
    };
    Densities measure_densities() const;
    MetricsPoint metrics_from(const Densities& d, const StepStats& fallback) const;

    Distribution distribution_;
    std::uint64_t seed_;
    ViewOptions views_;
    GanModel model_;
    MetricsHistory history_;
    std::optional<StepStats> last_stats_;
};

} // namespace ganlab
