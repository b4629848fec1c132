#pragma once

// Randomized payloads for protocol tests.

#include "ganlab/snapshot.hpp"

#include <limits>
#include <random>

namespace fixtures {

inline ganlab::TrainingSnapshot random_snapshot(std::mt19937_64& rng)
{
    using namespace ganlab;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> wide(-1e3, 1e3);
    std::uniform_int_distribution<int> small(0, 40);
    std::uniform_int_distribution<int> coin(0, 1);

    auto points = [&](int n, bool signed_values) {
        std::vector<Point2> p(static_cast<std::size_t>(n));
        for (auto& v : p) {
            v = signed_values ? Point2{wide(rng), wide(rng)} : Point2{unit(rng), unit(rng)};
        }
        return p;
    };
    auto values = [&](int n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) {
            x = unit(rng);
        }
        return v;
    };

    TrainingSnapshot s;
    s.epoch = std::uniform_int_distribution<std::int64_t>(0, 1'000'000'000)(rng);
    const char* modes[] = {"idle", "running", "paused", "slow_motion", "headless"};
    s.mode = modes[std::uniform_int_distribution<int>(0, 4)(rng)];
    const char* kinds[] = {"line", "two_gaussians", "ring", "three_clusters", "grid_blobs", "drawn"};
    s.distribution = kinds[std::uniform_int_distribution<int>(0, 5)(rng)];

    const int n = small(rng);
    s.real_samples = points(n, false);
    s.fake_samples = points(n, false);
    s.real_scores = values(n);
    s.fake_scores = values(n);
    s.fake_sample_movements = points(n, true);

    auto& m = s.manifold;
    m.resolution = std::uniform_int_distribution<int>(2, 6)(rng);
    m.noise_dim = coin(rng) ? 2 : 1;
    const int corners = m.noise_dim == 2 ? (m.resolution + 1) * (m.resolution + 1) : m.resolution + 1;
    m.corners = points(corners, true);
    m.cell_mass = values(m.cell_count());
    m.cell_density = values(m.cell_count());
    for (auto& d : m.cell_density) {
        d *= 1e6;
    }
    m.cell_flags.resize(static_cast<std::size_t>(m.cell_count()));
    for (std::size_t i = 0; i < m.cell_flags.size(); ++i) {
        m.cell_flags[i] = coin(rng) == 1;
    }

    s.heatmap.resolution = std::uniform_int_distribution<int>(1, 8)(rng);
    s.heatmap.scores = values(s.heatmap.resolution * s.heatmap.resolution);
    for (auto* g : {&s.real_density, &s.fake_density}) {
        g->resolution = std::uniform_int_distribution<int>(1, 6)(rng);
        g->mass = values(g->resolution * g->resolution);
    }

    s.metrics.epoch = s.epoch;
    s.metrics.d_loss = wide(rng);
    s.metrics.g_loss = unit(rng) * 1e-300;
    s.metrics.kl = coin(rng) ? std::numeric_limits<double>::infinity() : unit(rng);
    s.metrics.js = unit(rng) * 0.69;

    if (coin(rng)) {
        s.slow_phase = PhaseTag{coin(rng) ? Submodel::discriminator : Submodel::generator,
                                static_cast<Phase>(std::uniform_int_distribution<int>(1, 5)(rng)),
                                std::uniform_int_distribution<int>(0, 99)(rng)};
    }

    auto& c = s.config;
    c.gen_hidden.assign(static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 3)(rng)),
                        std::uniform_int_distribution<int>(1, 64)(rng));
    c.disc_hidden = {std::uniform_int_distribution<int>(1, 64)(rng), 3};
    c.optimizer_d.kind = coin(rng) ? nn::OptimizerKind::sgd : nn::OptimizerKind::adam;
    c.optimizer_d.learning_rate = unit(rng) + 1e-9;
    c.optimizer_g.learning_rate = unit(rng) * 1e-3 + 1e-12;
    c.loss = coin(rng) ? LossKind::log_loss : LossKind::least_squares;
    c.k_d = std::uniform_int_distribution<int>(1, 100)(rng);
    c.k_g = std::uniform_int_distribution<int>(1, 100)(rng);
    c.batch_size = std::uniform_int_distribution<int>(2, 10000)(rng);
    c.noise = {coin(rng) ? 1 : 2, coin(rng) ? NoiseDistribution::uniform : NoiseDistribution::gaussian};
    c.saturating_generator_loss = coin(rng) == 1;
    return s;
}

} // namespace fixtures
