#include "ganlab/experiment.hpp"

#include "ganlab/error.hpp"

#include <random>

namespace ganlab {

namespace {

std::vector<Point2> to_points(const nn::Batch& batch)
{
    std::vector<Point2> out(static_cast<std::size_t>(batch.rows()));
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
        out[i] = {batch(i, 0), batch(i, 1)};
    }
    return out;
}

std::vector<double> to_values(const nn::Batch& batch)
{
    return {batch.data(), batch.data() + batch.size()};
}

} // namespace

Experiment::Experiment(GanConfig config, Distribution distribution, std::uint64_t seed,
                       ViewOptions views)
    : distribution_(std::move(distribution)), seed_(seed), views_(views),
      model_(make_gan(config, seed))
{
    if (views_.metric_samples < 1) {
        throw ConfigError("metric sample count must be positive");
    }
}

void Experiment::set_distribution(Distribution distribution)
{
    if (distribution.kind == DistributionKind::drawn) {
        distribution = from_drawn_points(std::move(distribution.drawn_points),
                                         distribution.drawn_jitter);
    }
    distribution_ = std::move(distribution);
}

void Experiment::reset(std::uint64_t seed)
{
    model_ = make_gan(model_.config, seed);
    seed_ = seed;
    history_.clear();
    last_stats_.reset();
}

ConfigChangeEffect Experiment::apply(const ConfigChange& change)
{
    return apply_config_change(model_, change);
}

StepStats Experiment::train_epoch()
{
    return train_epoch(schedule_for(model_.config));
}

StepStats Experiment::train_epoch(Schedule schedule)
{
    StepStats stats = ganlab::train_epoch(model_, distribution_, schedule);
    last_stats_ = stats;
    return stats;
}

Rng Experiment::view_rng(std::uint64_t stream, bool per_epoch) const
{
    const auto epoch = per_epoch ? static_cast<std::uint64_t>(model_.epoch) : ~std::uint64_t{0};
    std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32),
                      static_cast<std::uint32_t>(stream), 0x9e3779b9U};
    return Rng(seq);
}

Experiment::Densities Experiment::measure_densities() const
{
    Rng rng = view_rng(1, true);
    const int n = views_.metric_samples;
    const nn::Batch real = sample_real(distribution_, n, rng);
    const nn::Batch fake = nn::predict(model_.generator, sample_noise(model_.config.noise, n, rng));
    return {density_grid(real, views_.density_resolution),
            density_grid(fake, views_.density_resolution)};
}

MetricsPoint Experiment::metrics_from(const Densities& d, const StepStats& fallback) const
{
    const StepStats& losses = last_stats_ ? *last_stats_ : fallback;
    return make_metrics_point(model_.epoch, losses.d_loss, losses.g_loss, d.real, d.fake);
}

MetricsPoint Experiment::measure() const
{
    StepStats fallback;
    if (!last_stats_) {
        Rng rng = view_rng(0, false);
        const int n = model_.config.batch_size;
        const nn::Batch real = sample_real(distribution_, n, rng);
        const nn::Batch noise = sample_noise(model_.config.noise, n, rng);
        fallback = evaluate(model_, real, noise);
    }
    return metrics_from(measure_densities(), fallback);
}

TrainingSnapshot Experiment::snapshot(const std::string& mode,
                                      std::optional<PhaseTag> slow_phase) const
{
    // Displayed samples are fixed per run so they only move when the
    // generator (or the distribution) changes.
    Rng rng = view_rng(0, false);
    const int n = model_.config.batch_size;
    const nn::Batch real = sample_real(distribution_, n, rng);
    const nn::Batch noise = sample_noise(model_.config.noise, n, rng);
    const StepStats view = evaluate(model_, real, noise);

    TrainingSnapshot s;
    s.epoch = model_.epoch;
    s.mode = mode;
    s.distribution = std::string(to_string(distribution_.kind));
    s.real_samples = to_points(real);
    s.fake_samples = to_points(view.fake_samples);
    s.real_scores = to_values(view.real_scores);
    s.fake_scores = to_values(view.fake_scores);
    s.fake_sample_movements = to_points(view.fake_sample_movements);
    s.manifold = compute_manifold(model_.generator, model_.config.noise, views_.manifold_resolution);
    s.heatmap = compute_heatmap(model_.discriminator, views_.heatmap_resolution);
    const Densities d = measure_densities();
    s.real_density = d.real;
    s.fake_density = d.fake;
    s.metrics = metrics_from(d, view);
    s.slow_phase = slow_phase;
    s.config = model_.config;
    return s;
}

TrainingSnapshot Experiment::emit(const std::string& mode, std::optional<PhaseTag> slow_phase)
{
    TrainingSnapshot s = snapshot(mode, slow_phase);
    if (last_stats_ && (history_.empty() || s.metrics.epoch > history_.points().back().epoch)) {
        history_.record(s.metrics);
    }
    return s;
}

MetricsPoint Experiment::record_metrics()
{
    MetricsPoint p = measure();
    if (last_stats_ && (history_.empty() || p.epoch > history_.points().back().epoch)) {
        history_.record(p);
    }
    return p;
}

} // namespace ganlab
