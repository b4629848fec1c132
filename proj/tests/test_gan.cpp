#include "ganlab/error.hpp"
#include "ganlab/gan.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ganlab;

namespace {

nn::Batch scores(std::initializer_list<double> v)
{
    nn::Batch b(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) {
        b(i++, 0) = x;
    }
    return b;
}

struct Batches {
    nn::Batch real;
    nn::Batch noise;
};

Batches draw(GanModel& model, const Distribution& dist)
{
    Batches b;
    b.real = sample_real(dist, model.config.batch_size, model.rng);
    b.noise = sample_noise(model.config.noise, model.config.batch_size, model.rng);
    return b;
}

} // namespace

TEST_CASE("noise sampling")
{
    Rng rng(42);
    SUBCASE("uniform 2D mean")
    {
        const auto z = sample_noise({2, NoiseDistribution::uniform}, 10000, rng);
        CHECK(z.cols() == 2);
        CHECK(z.col(0).mean() == doctest::Approx(0.5).epsilon(0.04));
        CHECK(z.col(1).mean() == doctest::Approx(0.5).epsilon(0.04));
        CHECK(z.minCoeff() >= 0.0);
        CHECK(z.maxCoeff() <= 1.0);
    }
    SUBCASE("gaussian 1D is clamped")
    {
        const auto z = sample_noise({1, NoiseDistribution::gaussian}, 10000, rng);
        CHECK(z.cols() == 1);
        CHECK(z.minCoeff() >= 0.0);
        CHECK(z.maxCoeff() <= 1.0);
        CHECK(std::abs(z.mean() - 0.5) < 0.02);
    }
    SUBCASE("determinism")
    {
        Rng a(9), b(9);
        CHECK(sample_noise({2, NoiseDistribution::gaussian}, 50, a) ==
              sample_noise({2, NoiseDistribution::gaussian}, 50, b));
    }
    SUBCASE("bad arguments")
    {
        CHECK_THROWS_AS(sample_noise({2, NoiseDistribution::uniform}, 0, rng), ContractError);
        CHECK_THROWS_AS(sample_noise({3, NoiseDistribution::uniform}, 4, rng), ConfigError);
    }
}

TEST_CASE("loss values")
{
    const double eps = 1e-9;
    CHECK(discriminator_loss(scores({1 - eps}), scores({eps}), LossKind::log_loss) ==
          doctest::Approx(0.0).epsilon(1e-6));
    CHECK(discriminator_loss(scores({0.5}), scores({0.5}), LossKind::log_loss) ==
          doctest::Approx(2.0 * std::log(2.0)));
    CHECK(discriminator_loss(scores({1.0}), scores({0.0}), LossKind::least_squares) == 0.0);
    CHECK(generator_loss(scores({1 - eps}), LossKind::log_loss) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(generator_loss(scores({0.5}), LossKind::log_loss) == doctest::Approx(std::log(2.0)));
    CHECK(generator_loss(scores({0.5}), LossKind::least_squares) == doctest::Approx(0.125));
    CHECK(generator_loss(scores({0.5}), LossKind::log_loss, true) == doctest::Approx(-std::log(2.0)));

    CHECK_THROWS_AS(discriminator_loss(nn::Batch(0, 1), scores({0.5}), LossKind::log_loss),
                    ContractError);
    CHECK_THROWS_AS(generator_loss(nn::Batch(0, 1), LossKind::least_squares), ContractError);
}

TEST_CASE("losses are non-negative")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
    for (int trial = 0; trial < 200; ++trial) {
        nn::Batch r(8, 1), f(8, 1);
        for (int i = 0; i < 8; ++i) {
            r(i, 0) = u(rng);
            f(i, 0) = u(rng);
        }
        for (auto kind : {LossKind::log_loss, LossKind::least_squares}) {
            CHECK(discriminator_loss(r, f, kind) >= 0.0);
            CHECK(generator_loss(f, kind) >= 0.0);
        }
    }
}

// Per-example score derivatives against central differences of each
// example's own loss term.
TEST_CASE("loss gradients match finite differences")
{
    const double h = 1e-6;
    const nn::Batch r = scores({0.2, 0.7, 0.95});
    const nn::Batch f = scores({0.1, 0.4, 0.8});
    const int n = 3;
    for (auto kind : {LossKind::log_loss, LossKind::least_squares}) {
        const auto g = discriminator_loss_grads(r, f, kind);
        for (int i = 0; i < n; ++i) {
            nn::Batch up = r, down = r;
            up(i, 0) += h;
            down(i, 0) -= h;
            const double fd =
                n * (discriminator_loss(up, f, kind) - discriminator_loss(down, f, kind)) / (2 * h);
            CHECK(g.real(i, 0) == doctest::Approx(fd).epsilon(1e-6));
            up = f;
            down = f;
            up(i, 0) += h;
            down(i, 0) -= h;
            const double fd_fake =
                n * (discriminator_loss(r, up, kind) - discriminator_loss(r, down, kind)) / (2 * h);
            CHECK(g.fake(i, 0) == doctest::Approx(fd_fake).epsilon(1e-6));
        }
        for (bool saturating : {false, true}) {
            const auto gg = generator_loss_grads(f, kind, saturating);
            for (int i = 0; i < n; ++i) {
                nn::Batch up = f, down = f;
                up(i, 0) += h;
                down(i, 0) -= h;
                const double fd = n *
                                  (generator_loss(up, kind, saturating) -
                                   generator_loss(down, kind, saturating)) /
                                  (2 * h);
                CHECK(gg(i, 0) == doctest::Approx(fd).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("model construction")
{
    GanConfig cfg;
    cfg.noise.dim = 1;
    cfg.gen_hidden = {5, 6};
    const auto m = make_gan(cfg, 1);
    CHECK(m.generator.input_width() == 1);
    CHECK(m.generator.output_width() == 2);
    CHECK(m.discriminator.input_width() == 2);
    CHECK(m.discriminator.output_width() == 1);
    CHECK(m.generator.layers.size() == 3);
    CHECK(m.generator.layers.back().activation == nn::Activation::sigmoid);
    CHECK(m.discriminator.layers.back().activation == nn::Activation::sigmoid);
    CHECK(m.epoch == 0);

    GanConfig bad;
    bad.k_d = 0;
    CHECK_THROWS_AS(make_gan(bad, 1), ConfigError);
    bad = {};
    bad.batch_size = 1;
    CHECK_THROWS_AS(make_gan(bad, 1), ConfigError);
    bad = {};
    bad.disc_hidden = {0};
    CHECK_THROWS_AS(make_gan(bad, 1), ConfigError);
}

TEST_CASE("hidden layer strings")
{
    CHECK(parse_hidden_layers("1x14") == std::vector<int>{14});
    CHECK(parse_hidden_layers("3x32") == std::vector<int>{32, 32, 32});
    CHECK(parse_hidden_layers("14,8") == std::vector<int>{14, 8});
    CHECK(format_hidden_layers({32, 32, 32}) == "3x32");
    CHECK_THROWS_AS(parse_hidden_layers("0x14"), ConfigError);
    CHECK_THROWS_AS(parse_hidden_layers("x"), ConfigError);
    CHECK(format_hidden_layers({14, 8}) == "14,8");
    CHECK(parse_hidden_layers("none").empty());
    CHECK(format_hidden_layers({}) == "none");
}

TEST_CASE("discriminator step freezes the generator")
{
    const auto dist = make_preset(DistributionKind::two_gaussians);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto model = make_gan({}, seed);
        const auto b = draw(model, dist);
        const auto gen_before = model.generator;
        const auto before = evaluate(model, b.real, b.noise);
        const auto stats = train_discriminator_step(model, b.real, b.noise);
        CHECK(nn::identical(model.generator, gen_before));
        CHECK(stats.fake_samples == before.fake_samples);
        CHECK(evaluate(model, b.real, b.noise).fake_samples == before.fake_samples);
        CHECK(stats.real_scores.rows() == model.config.batch_size);
        CHECK((stats.real_scores.array() > 0).all());
        CHECK((stats.fake_scores.array() < 1).all());
        CHECK(stats.fake_sample_movements.size() == 0);
    }
}

TEST_CASE("a small SGD discriminator step lowers its loss on the same batches")
{
    GanConfig cfg;
    cfg.optimizer_d = {nn::OptimizerKind::sgd, 0.01};
    const auto dist = make_preset(DistributionKind::two_gaussians);
    int lowered = 0;
    const int seeds = 50;
    for (int seed = 0; seed < seeds; ++seed) {
        auto model = make_gan(cfg, seed);
        const auto b = draw(model, dist);
        const double before = evaluate(model, b.real, b.noise).d_loss;
        train_discriminator_step(model, b.real, b.noise);
        const double after = evaluate(model, b.real, b.noise).d_loss;
        lowered += after < before ? 1 : 0;
    }
    MESSAGE("loss lowered for " << lowered << "/" << seeds << " seeds");
    CHECK(lowered == seeds);
}

TEST_CASE("generator step freezes the discriminator and reports movements")
{
    const auto dist = make_preset(DistributionKind::ring);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto model = make_gan({}, seed);
        const auto b = draw(model, dist);
        const auto disc_before = model.discriminator;
        const auto gen_before = model.generator;
        const auto stats = train_generator_step(model, b.noise);
        CHECK(nn::identical(model.discriminator, disc_before));
        CHECK_FALSE(nn::identical_parameters(model.generator, gen_before));

        // Movements are the negated input gradients through the frozen
        // discriminator at the pre-update samples.
        const auto fake = nn::forward(disc_before, stats.fake_samples);
        const nn::Batch expected = -nn::backward(disc_before, fake.cache,
                                            generator_loss_grads(fake.outputs, LossKind::log_loss))
                                   .inputs;
        CHECK(stats.fake_sample_movements == expected);
        CHECK(stats.fake_samples == nn::predict(gen_before, b.noise));
    }
}

TEST_CASE("constant discriminator gives zero movements")
{
    auto model = make_gan({}, 5);
    for (auto& w : model.discriminator.weights) {
        w.setZero();
    }
    const auto b = draw(model, make_preset(DistributionKind::line));
    const auto stats = train_generator_step(model, b.noise);
    CHECK(stats.fake_sample_movements.isZero(0.0));
    CHECK((stats.fake_scores.array() == 0.5).all());
}

TEST_CASE("movements point toward higher discriminator scores")
{
    const auto dist = make_preset(DistributionKind::three_clusters);
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        for (auto loss : {LossKind::log_loss, LossKind::least_squares}) {
            GanConfig cfg;
            cfg.loss = loss;
            auto model = make_gan(cfg, seed);
            // A few updates so the discriminator is not near-constant.
            for (int e = 0; e < 20; ++e) {
                train_epoch(model, dist);
            }
            const auto b = draw(model, dist);
            const auto stats = evaluate(model, b.real, b.noise);
            for (Eigen::Index i = 0; i < stats.fake_samples.rows(); ++i) {
                const Eigen::RowVector2d m = stats.fake_sample_movements.row(i);
                if (m.norm() < 1e-12) {
                    continue;
                }
                const Eigen::RowVector2d dir = m / m.norm();
                const double h = 1e-6;
                nn::Batch pts(2, 2);
                pts.row(0) = stats.fake_samples.row(i) + h * dir;
                pts.row(1) = stats.fake_samples.row(i) - h * dir;
                const nn::Batch s = nn::predict(model.discriminator, pts);
                const double slope = (s(0, 0) - s(1, 0)) / (2 * h);
                CHECK(slope >= -1e-8);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("step contracts")
{
    auto model = make_gan({}, 1);
    const auto dist = make_preset(DistributionKind::line);
    Rng rng(0);
    const auto small = sample_real(dist, 10, rng);
    const auto noise = sample_noise(model.config.noise, 64, rng);
    CHECK_THROWS_AS(train_discriminator_step(model, small, noise), ContractError);
    CHECK_THROWS_AS(train_generator_step(model, sample_noise(model.config.noise, 3, rng)),
                    ContractError);

    TrainingStep step(Submodel::generator, nn::Batch{}, noise);
    for (int p = 1; p <= kPhaseCount; ++p) {
        CHECK(static_cast<int>(step.next_phase()) == p);
        step.advance(model);
    }
    CHECK(step.finished());
    CHECK_THROWS_AS(step.advance(model), ContractError);
}

TEST_CASE("phases before update leave the model untouched")
{
    auto model = make_gan({}, 3);
    const auto b = draw(model, make_preset(DistributionKind::ring));
    for (auto which : {Submodel::discriminator, Submodel::generator}) {
        const auto before = model;
        TrainingStep step(which, b.real, b.noise);
        for (int p = 1; p < kPhaseCount; ++p) {
            step.advance(model);
            CHECK(nn::identical(model.generator, before.generator));
            CHECK(nn::identical(model.discriminator, before.discriminator));
        }
        step.advance(model);
        CHECK(step.finished());
    }
}

TEST_CASE("non-finite losses are numerical errors and leave the model unchanged")
{
    GanConfig cfg;
    cfg.optimizer_d = {nn::OptimizerKind::sgd, 1e6};
    cfg.optimizer_g = {nn::OptimizerKind::sgd, 1e6};
    const auto dist = make_preset(DistributionKind::two_gaussians);
    auto model = make_gan(cfg, 0);
    bool failed = false;
    for (int e = 0; e < 200 && !failed; ++e) {
        const auto before = model;
        try {
            train_epoch(model, dist);
        } catch (const NumericalError&) {
            failed = true;
            CHECK(nn::identical(model.generator, before.generator));
            CHECK(nn::identical(model.discriminator, before.discriminator));
            CHECK(model.epoch == before.epoch);
        }
    }
    CHECK(failed);
}

TEST_CASE("epoch schedule")
{
    const auto dist = make_preset(DistributionKind::two_gaussians);
    SUBCASE("k_d=1, k_g=1 applies two updates")
    {
        auto model = make_gan({}, 1);
        EpochRunner runner(schedule_for(model.config));
        runner.run_to_end(model, dist);
        CHECK(runner.updates_applied() == 2);
        CHECK(model.epoch == 1);
    }
    SUBCASE("k_d=3 advances the discriminator optimizer by 3")
    {
        GanConfig cfg;
        cfg.k_d = 3;
        auto model = make_gan(cfg, 1);
        train_epoch(model, dist);
        CHECK(model.discriminator.optimizer_state.step_count == 3);
        CHECK(model.generator.optimizer_state.step_count == 1);
        train_epoch(model, dist);
        CHECK(model.discriminator.optimizer_state.step_count == 6);
    }
    SUBCASE("k_d + k_g updates and phase order")
    {
        GanConfig cfg;
        cfg.k_d = 2;
        cfg.k_g = 3;
        auto model = make_gan(cfg, 1);
        EpochRunner runner(schedule_for(cfg));
        std::vector<PhaseTag> tags;
        while (!runner.finished()) {
            tags.push_back(runner.advance(model, dist));
        }
        REQUIRE(tags.size() == 5u * kPhaseCount);
        CHECK(runner.updates_applied() == 5);
        CHECK(tags[0] == PhaseTag{Submodel::discriminator, Phase::run_generator, 0});
        CHECK(tags[5] == PhaseTag{Submodel::discriminator, Phase::run_generator, 1});
        CHECK(tags[10] == PhaseTag{Submodel::generator, Phase::run_generator, 0});
        CHECK(tags.back() == PhaseTag{Submodel::generator, Phase::update, 2});
        CHECK(model.epoch == 1);
    }
    SUBCASE("epoch counter after N calls")
    {
        auto model = make_gan({}, 2);
        for (int i = 0; i < 17; ++i) {
            train_epoch(model, dist);
        }
        CHECK(model.epoch == 17);
    }
    SUBCASE("slow stepping equals a whole epoch")
    {
        auto a = make_gan({}, 4);
        auto b = make_gan({}, 4);
        for (int e = 0; e < 5; ++e) {
            const auto sa = train_epoch(a, dist);
            EpochRunner runner(schedule_for(b.config));
            while (!runner.finished()) {
                runner.advance(b, dist);
            }
            CHECK(sa.d_loss == runner.stats().d_loss);
            CHECK(sa.g_loss == runner.stats().g_loss);
        }
        CHECK(nn::identical(a.generator, b.generator));
        CHECK(nn::identical(a.discriminator, b.discriminator));
    }
    SUBCASE("empty schedule")
    {
        CHECK_THROWS_AS(EpochRunner(Schedule{0, 0}), ContractError);
    }
}

TEST_CASE("training is deterministic")
{
    const auto dist = make_preset(DistributionKind::three_clusters);
    auto a = make_gan({}, 11);
    auto b = make_gan({}, 11);
    for (int e = 0; e < 30; ++e) {
        const auto sa = train_epoch(a, dist);
        const auto sb = train_epoch(b, dist);
        REQUIRE(sa.d_loss == sb.d_loss);
        REQUIRE(sa.g_loss == sb.g_loss);
    }
}

TEST_CASE("config changes")
{
    const auto dist = make_preset(DistributionKind::two_gaussians);
    auto trained = [&] {
        auto m = make_gan({}, 6);
        for (int e = 0; e < 3; ++e) {
            train_epoch(m, dist);
        }
        return m;
    };

    SUBCASE("learning rate keeps every parameter")
    {
        auto m = trained();
        const auto before = m;
        apply_config_change(m, {ConfigField::lr_g, 0.01});
        apply_config_change(m, {ConfigField::lr_g, 0.001});
        CHECK(nn::identical(m.generator, before.generator));
        CHECK(nn::identical(m.discriminator, before.discriminator));
        CHECK(m.config.optimizer_g.learning_rate == 0.001);
    }
    SUBCASE("discriminator layers reinitialize only the discriminator")
    {
        auto m = trained();
        const auto before = m;
        const auto effect = apply_config_change(m, {ConfigField::disc_layers, std::vector<int>{14, 14}});
        CHECK(effect.discriminator_reinitialized);
        CHECK_FALSE(effect.generator_reinitialized);
        CHECK(nn::identical(m.generator, before.generator));
        CHECK(m.discriminator.layers.size() == 3);
        CHECK(m.discriminator.optimizer_state.step_count == 0);
        CHECK(m.config.disc_hidden == std::vector<int>{14, 14});
    }
    SUBCASE("noise dimension reinitializes the generator")
    {
        auto m = trained();
        const auto before = m;
        const auto effect = apply_config_change(m, {ConfigField::noise_dim, std::int64_t{1}});
        CHECK(effect.generator_reinitialized);
        CHECK(m.generator.input_width() == 1);
        CHECK(nn::identical(m.discriminator, before.discriminator));
    }
    SUBCASE("loss kind is applied in place and used by the next step")
    {
        auto m = trained();
        const auto before = m;
        apply_config_change(m, {ConfigField::loss, std::string("ls")});
        CHECK(nn::identical(m.generator, before.generator));
        CHECK(nn::identical(m.discriminator, before.discriminator));
        CHECK(m.config.loss == LossKind::least_squares);
        auto probe = m;
        const auto b = draw(probe, dist);
        const auto stats = train_discriminator_step(probe, b.real, b.noise);
        CHECK(stats.d_loss ==
              doctest::Approx(discriminator_loss(stats.real_scores, stats.fake_scores,
                                                 LossKind::least_squares)));
    }
    SUBCASE("optimizer kind resets moments only")
    {
        auto m = trained();
        const auto before = m;
        apply_config_change(m, {ConfigField::opt_d, std::string("sgd")});
        CHECK(nn::identical_parameters(m.discriminator, before.discriminator));
        CHECK(m.discriminator.optimizer_state.step_count == 0);
        CHECK(nn::identical(m.generator, before.generator));
    }
    SUBCASE("invalid edits are rejected without change")
    {
        auto m = trained();
        const auto before = m;
        CHECK_THROWS_AS(apply_config_change(m, {ConfigField::k_d, std::int64_t{0}}), ConfigError);
        CHECK_THROWS_AS(apply_config_change(m, {ConfigField::lr_d, -1.0}), ConfigError);
        CHECK_THROWS_AS(apply_config_change(m, {ConfigField::batch_size, std::string("big")}),
                        ConfigError);
        CHECK_THROWS_AS(apply_config_change(m, {ConfigField::gen_layers, std::string("0x3")}),
                        ConfigError);
        CHECK(m.config == before.config);
        CHECK(nn::identical(m.generator, before.generator));
        CHECK(nn::identical(m.discriminator, before.discriminator));
    }
    SUBCASE("field names round-trip")
    {
        for (auto f : {ConfigField::lr_d, ConfigField::lr_g, ConfigField::opt_d, ConfigField::opt_g,
                       ConfigField::loss, ConfigField::k_d, ConfigField::k_g, ConfigField::batch_size,
                       ConfigField::noise_dist, ConfigField::noise_dim, ConfigField::gen_layers,
                       ConfigField::disc_layers, ConfigField::saturating_generator_loss}) {
            CHECK(parse_config_field(to_string(f)) == f);
        }
        CHECK_THROWS_AS(parse_config_field("momentum"), ConfigError);
    }
}
