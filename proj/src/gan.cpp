#include "ganlab/gan.hpp"

#include "ganlab/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <utility>

namespace ganlab {

namespace {

void require_scores(const nn::Batch& scores, const char* what)
{
    if (scores.size() == 0) {
        throw ContractError(std::string("empty ") + what + " score batch");
    }
}

void require_finite(double value, const char* what)
{
    if (!std::isfinite(value)) {
        throw NumericalError(std::string("non-finite ") + what);
    }
}

void validate_hidden(const std::vector<int>& hidden, const char* which)
{
    if (static_cast<int>(hidden.size()) > kMaxHiddenLayers) {
        throw ConfigError(std::string(which) + ": at most " + std::to_string(kMaxHiddenLayers) +
                          " hidden layers");
    }
    for (int w : hidden) {
        if (w < 1 || w > kMaxLayerWidth) {
            throw ConfigError(std::string(which) + ": hidden widths must lie in [1, " +
                              std::to_string(kMaxLayerWidth) + "]");
        }
    }
}

void validate_optimizer(const nn::OptimizerSpec& spec, const char* which)
{
    if (!(spec.learning_rate > 0.0) || !std::isfinite(spec.learning_rate)) {
        throw ConfigError(std::string(which) + ": learning rate must be positive and finite");
    }
}

double as_double(const ConfigValue& v, ConfigField f)
{
    if (const auto* d = std::get_if<double>(&v)) {
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return static_cast<double>(*i);
    }
    throw ConfigError(std::string(to_string(f)) + " expects a number");
}

int as_int(const ConfigValue& v, ConfigField f)
{
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        if (*i < -1'000'000'000 || *i > 1'000'000'000) {
            throw ConfigError(std::string(to_string(f)) + " out of range");
        }
        return static_cast<int>(*i);
    }
    if (const auto* d = std::get_if<double>(&v)) {
        if (std::isfinite(*d) && std::floor(*d) == *d && std::abs(*d) < 1e9) {
            return static_cast<int>(*d);
        }
    }
    throw ConfigError(std::string(to_string(f)) + " expects an integer");
}

const std::string& as_string(const ConfigValue& v, ConfigField f)
{
    if (const auto* s = std::get_if<std::string>(&v)) {
        return *s;
    }
    throw ConfigError(std::string(to_string(f)) + " expects a string");
}

nn::OptimizerKind parse_optimizer(const std::string& s)
{
    if (s == "sgd") {
        return nn::OptimizerKind::sgd;
    }
    if (s == "adam") {
        return nn::OptimizerKind::adam;
    }
    throw ConfigError("unknown optimizer '" + s + "'");
}

LossKind parse_loss(const std::string& s)
{
    if (s == "log" || s == "log_loss") {
        return LossKind::log_loss;
    }
    if (s == "ls" || s == "least_squares") {
        return LossKind::least_squares;
    }
    throw ConfigError("unknown loss '" + s + "'");
}

NoiseDistribution parse_noise_dist(const std::string& s)
{
    if (s == "uniform") {
        return NoiseDistribution::uniform;
    }
    if (s == "gaussian") {
        return NoiseDistribution::gaussian;
    }
    throw ConfigError("unknown noise distribution '" + s + "'");
}

int parse_positive(std::string_view text, std::string_view whole)
{
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value < 1) {
        throw ConfigError("invalid layer spec '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

std::vector<int> parse_hidden_layers(std::string_view text)
{
    if (text.empty() || text == "0" || text == "none") {
        return {};
    }
    if (const auto x = text.find('x'); x != std::string_view::npos) {
        const int count = parse_positive(text.substr(0, x), text);
        const int width = parse_positive(text.substr(x + 1), text);
        if (count > kMaxHiddenLayers) {
            throw ConfigError("at most " + std::to_string(kMaxHiddenLayers) + " hidden layers");
        }
        return std::vector<int>(static_cast<std::size_t>(count), width);
    }
    std::vector<int> widths;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string_view::npos ? text.size() : comma;
        widths.push_back(parse_positive(text.substr(start, end - start), text));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return widths;
}

std::string format_hidden_layers(const std::vector<int>& widths)
{
    if (widths.empty()) {
        return "none";
    }
    if (std::all_of(widths.begin(), widths.end(), [&](int w) { return w == widths.front(); })) {
        return std::to_string(widths.size()) + "x" + std::to_string(widths.front());
    }
    std::string out;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        out += (i ? "," : "") + std::to_string(widths[i]);
    }
    return out;
}

std::string_view to_string(NoiseDistribution d)
{
    return d == NoiseDistribution::uniform ? "uniform" : "gaussian";
}

std::string_view to_string(LossKind k)
{
    return k == LossKind::log_loss ? "log_loss" : "least_squares";
}

std::string_view to_string(Submodel s)
{
    return s == Submodel::discriminator ? "discriminator" : "generator";
}

std::string_view to_string(Phase p)
{
    switch (p) {
    case Phase::run_generator:
        return "run_generator";
    case Phase::run_discriminator:
        return "run_discriminator";
    case Phase::compute_loss:
        return "compute_loss";
    case Phase::compute_gradients:
        return "compute_gradients";
    case Phase::update:
        return "update";
    }
    return "?";
}

void GanConfig::validate() const
{
    validate_hidden(gen_hidden, "gen_layers");
    validate_hidden(disc_hidden, "disc_layers");
    validate_optimizer(optimizer_d, "lr_d");
    validate_optimizer(optimizer_g, "lr_g");
    if (k_d < 1 || k_d > kMaxLoopCount || k_g < 1 || k_g > kMaxLoopCount) {
        throw ConfigError("k_d and k_g must lie in [1, " + std::to_string(kMaxLoopCount) + "]");
    }
    if (batch_size < 2 || batch_size > kMaxBatchSize) {
        throw ConfigError("batch_size must lie in [2, " + std::to_string(kMaxBatchSize) + "]");
    }
    if (noise.dim != 1 && noise.dim != 2) {
        throw ConfigError("noise dimension must be 1 or 2");
    }
}

// Both networks read values from the unit square; map them to [-1,1] so
// zero-bias ReLU boundaries start through the middle of the data.
nn::MlpModel centred(nn::MlpModel m)
{
    m.input_offset = 0.5;
    m.input_scale = 2.0;
    return m;
}

nn::MlpModel make_generator(const GanConfig& config, std::uint64_t seed)
{
    return centred(nn::mlp_init(
        nn::make_layer_chain(config.noise.dim, config.gen_hidden, 2, nn::Activation::sigmoid), seed));
}

nn::MlpModel make_discriminator(const GanConfig& config, std::uint64_t seed)
{
    return centred(nn::mlp_init(
        nn::make_layer_chain(2, config.disc_hidden, 1, nn::Activation::sigmoid), seed));
}

GanModel make_gan(const GanConfig& config, std::uint64_t seed)
{
    config.validate();
    GanModel model;
    model.rng.seed(seed);
    const std::uint64_t gen_seed = model.rng();
    const std::uint64_t disc_seed = model.rng();
    model.generator = make_generator(config, gen_seed);
    model.discriminator = make_discriminator(config, disc_seed);
    model.config = config;
    return model;
}

nn::Batch sample_noise(const NoiseSpec& spec, int n, Rng& rng)
{
    if (n < 1) {
        throw ContractError("noise sample count must be at least 1");
    }
    if (spec.dim != 1 && spec.dim != 2) {
        throw ConfigError("noise dimension must be 1 or 2");
    }
    nn::Batch out(n, spec.dim);
    if (spec.dist == NoiseDistribution::uniform) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < spec.dim; ++d) {
                out(i, d) = unit(rng);
            }
        }
    } else {
        std::normal_distribution<double> normal(kGaussianNoiseMean, kGaussianNoiseStddev);
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < spec.dim; ++d) {
                out(i, d) = std::clamp(normal(rng), 0.0, 1.0);
            }
        }
    }
    return out;
}

double discriminator_loss(const nn::Batch& real_scores, const nn::Batch& fake_scores,
                          LossKind loss)
{
    require_scores(real_scores, "real");
    require_scores(fake_scores, "fake");
    if (loss == LossKind::log_loss) {
        const double real_term = -real_scores.array().log().mean();
        const double fake_term = -(1.0 - fake_scores.array()).log().mean();
        return real_term + fake_term;
    }
    return 0.5 * (real_scores.array() - 1.0).square().mean() +
           0.5 * fake_scores.array().square().mean();
}

double generator_loss(const nn::Batch& fake_scores, LossKind loss, bool saturating)
{
    require_scores(fake_scores, "fake");
    if (loss == LossKind::log_loss) {
        if (saturating) {
            return (1.0 - fake_scores.array()).log().mean();
        }
        return -fake_scores.array().log().mean();
    }
    return 0.5 * (fake_scores.array() - 1.0).square().mean();
}

DiscriminatorLossGrads discriminator_loss_grads(const nn::Batch& real_scores,
                                                const nn::Batch& fake_scores, LossKind loss)
{
    require_scores(real_scores, "real");
    require_scores(fake_scores, "fake");
    DiscriminatorLossGrads g;
    if (loss == LossKind::log_loss) {
        g.real = -real_scores.array().inverse();
        g.fake = (1.0 - fake_scores.array()).inverse();
    } else {
        g.real = real_scores.array() - 1.0;
        g.fake = fake_scores;
    }
    return g;
}

nn::Batch generator_loss_grads(const nn::Batch& fake_scores, LossKind loss, bool saturating)
{
    require_scores(fake_scores, "fake");
    if (loss == LossKind::log_loss) {
        if (saturating) {
            return -(1.0 - fake_scores.array()).inverse();
        }
        return -fake_scores.array().inverse();
    }
    return fake_scores.array() - 1.0;
}

// --- TrainingStep ----------------------------------------------------------

TrainingStep::TrainingStep(Submodel which, nn::Batch real_batch, nn::Batch noise_batch)
    : which_(which), real_batch_(std::move(real_batch)), noise_batch_(std::move(noise_batch))
{
    if (noise_batch_.rows() == 0) {
        throw ContractError("empty noise batch");
    }
    if (which_ == Submodel::discriminator && real_batch_.rows() == 0) {
        throw ContractError("discriminator step needs a real batch");
    }
    if (real_batch_.rows() != 0 && real_batch_.cols() != 2) {
        throw ShapeError("real samples must be 2D");
    }
}

Phase TrainingStep::next_phase() const
{
    if (finished()) {
        throw ContractError("training step already finished");
    }
    return static_cast<Phase>(next_);
}

Phase TrainingStep::advance(GanModel& model)
{
    const Phase phase = next_phase();
    switch (phase) {
    case Phase::run_generator:
        run_generator(model);
        break;
    case Phase::run_discriminator:
        run_discriminator(model);
        break;
    case Phase::compute_loss:
        compute_loss(model);
        break;
    case Phase::compute_gradients:
        compute_gradients(model);
        break;
    case Phase::update:
        update(model);
        break;
    }
    next_ = next_ == kPhaseCount ? 0 : next_ + 1;
    return phase;
}

void TrainingStep::run_to_end(GanModel& model)
{
    while (!finished()) {
        advance(model);
    }
}

void TrainingStep::run_generator(const GanModel& model)
{
    auto result = nn::forward(model.generator, noise_batch_);
    if (!result.outputs.allFinite()) {
        throw NumericalError("generator produced non-finite samples");
    }
    stats_.fake_samples = result.outputs;
    generator_cache_ = std::move(result.cache);
}

void TrainingStep::run_discriminator(const GanModel& model)
{
    auto fake = nn::forward(model.discriminator, stats_.fake_samples);
    stats_.fake_scores = fake.outputs;
    fake_cache_ = std::move(fake.cache);
    if (real_batch_.rows() != 0) {
        auto real = nn::forward(model.discriminator, real_batch_);
        stats_.real_scores = real.outputs;
        real_cache_ = std::move(real.cache);
    }
}

void TrainingStep::compute_loss(const GanModel& model)
{
    const auto& cfg = model.config;
    if (stats_.real_scores.size() != 0) {
        stats_.d_loss = discriminator_loss(stats_.real_scores, stats_.fake_scores, cfg.loss);
    }
    stats_.g_loss = generator_loss(stats_.fake_scores, cfg.loss, cfg.saturating_generator_loss);
    if (which_ == Submodel::discriminator) {
        require_finite(stats_.d_loss, "discriminator loss");
    } else {
        require_finite(stats_.g_loss, "generator loss");
    }
}

void TrainingStep::compute_gradients(const GanModel& model)
{
    const auto& cfg = model.config;
    if (which_ == Submodel::discriminator) {
        const auto score_grads =
            discriminator_loss_grads(stats_.real_scores, stats_.fake_scores, cfg.loss);
        nn::Gradients grads =
            nn::backward(model.discriminator, real_cache_, score_grads.real).params;
        grads += nn::backward(model.discriminator, fake_cache_, score_grads.fake).params;
        if (!grads.all_finite()) {
            throw NumericalError("non-finite discriminator gradient");
        }
        grads_ = std::move(grads);
        return;
    }
    const nn::Batch score_grads =
        generator_loss_grads(stats_.fake_scores, cfg.loss, cfg.saturating_generator_loss);
    const nn::Batch sample_grads =
        nn::backward(model.discriminator, fake_cache_, score_grads).inputs;
    nn::Gradients grads = nn::backward(model.generator, generator_cache_, sample_grads).params;
    if (!grads.all_finite() || !sample_grads.allFinite()) {
        throw NumericalError("non-finite generator gradient");
    }
    stats_.fake_sample_movements = -sample_grads;
    grads_ = std::move(grads);
}

void TrainingStep::update(GanModel& model)
{
    if (which_ == Submodel::discriminator) {
        nn::apply_update(model.discriminator, grads_, model.config.optimizer_d);
    } else {
        nn::apply_update(model.generator, grads_, model.config.optimizer_g);
    }
}

namespace {

void require_batch_size(const GanModel& model, const nn::Batch& batch, const char* what)
{
    if (batch.rows() != model.config.batch_size) {
        throw ContractError(std::string(what) + " batch has " + std::to_string(batch.rows()) +
                            " rows, config batch_size is " +
                            std::to_string(model.config.batch_size));
    }
}

} // namespace

StepStats train_discriminator_step(GanModel& model, const nn::Batch& real_batch,
                                   const nn::Batch& noise_batch)
{
    require_batch_size(model, real_batch, "real");
    require_batch_size(model, noise_batch, "noise");
    TrainingStep step(Submodel::discriminator, real_batch, noise_batch);
    step.run_to_end(model);
    return step.stats();
}

StepStats train_generator_step(GanModel& model, const nn::Batch& noise_batch)
{
    require_batch_size(model, noise_batch, "noise");
    TrainingStep step(Submodel::generator, nn::Batch{}, noise_batch);
    step.run_to_end(model);
    return step.stats();
}

// --- EpochRunner -----------------------------------------------------------

EpochRunner::EpochRunner(Schedule schedule) : schedule_(schedule)
{
    if (schedule_.discriminator_steps < 0 || schedule_.generator_steps < 0 ||
        schedule_.discriminator_steps + schedule_.generator_steps == 0) {
        throw ContractError("an epoch needs at least one update");
    }
}

bool EpochRunner::finished() const
{
    return finished_;
}

PhaseTag EpochRunner::next_phase() const
{
    if (finished_) {
        throw ContractError("epoch already finished");
    }
    if (current_ && !current_->finished()) {
        const int index = steps_started_ - 1;
        const bool disc = current_->submodel() == Submodel::discriminator;
        return {current_->submodel(), current_->next_phase(),
                disc ? index : index - schedule_.discriminator_steps};
    }
    const int index = steps_started_;
    if (index < schedule_.discriminator_steps) {
        return {Submodel::discriminator, Phase::run_generator, index};
    }
    return {Submodel::generator, Phase::run_generator, index - schedule_.discriminator_steps};
}

PhaseTag EpochRunner::advance(GanModel& model, const Distribution& source)
{
    const PhaseTag tag = next_phase();
    if (!current_ || current_->finished()) {
        const int n = model.config.batch_size;
        nn::Batch real = sample_real(source, n, model.rng);
        nn::Batch noise = sample_noise(model.config.noise, n, model.rng);
        current_.emplace(tag.submodel, std::move(real), std::move(noise));
        ++steps_started_;
    }
    current_->advance(model);
    if (!current_->finished()) {
        return tag;
    }

    ++updates_;
    const StepStats& step = current_->stats();
    if (tag.submodel == Submodel::discriminator) {
        stats_ = step;
    } else {
        const double d_loss = schedule_.discriminator_steps > 0 ? stats_.d_loss : step.d_loss;
        stats_ = step;
        stats_.d_loss = d_loss;
    }
    if (steps_started_ == schedule_.discriminator_steps + schedule_.generator_steps) {
        finished_ = true;
        ++model.epoch;
    }
    return tag;
}

void EpochRunner::run_to_end(GanModel& model, const Distribution& source)
{
    while (!finished()) {
        advance(model, source);
    }
}

Schedule schedule_for(const GanConfig& config)
{
    return {config.k_d, config.k_g};
}

StepStats train_epoch(GanModel& model, const Distribution& source, Schedule schedule)
{
    GanModel working = model;
    EpochRunner runner(schedule);
    runner.run_to_end(working, source);
    model = std::move(working);
    return runner.stats();
}

StepStats train_epoch(GanModel& model, const Distribution& source)
{
    return train_epoch(model, source, schedule_for(model.config));
}

StepStats evaluate(const GanModel& model, const nn::Batch& real_batch,
                   const nn::Batch& noise_batch)
{
    const auto& cfg = model.config;
    StepStats stats;
    const auto gen = nn::forward(model.generator, noise_batch);
    stats.fake_samples = gen.outputs;
    const auto fake = nn::forward(model.discriminator, stats.fake_samples);
    stats.fake_scores = fake.outputs;
    stats.real_scores = nn::predict(model.discriminator, real_batch);
    stats.d_loss = discriminator_loss(stats.real_scores, stats.fake_scores, cfg.loss);
    stats.g_loss = generator_loss(stats.fake_scores, cfg.loss, cfg.saturating_generator_loss);
    const nn::Batch score_grads =
        generator_loss_grads(stats.fake_scores, cfg.loss, cfg.saturating_generator_loss);
    stats.fake_sample_movements = -nn::backward(model.discriminator, fake.cache, score_grads).inputs;
    return stats;
}

// --- config edits ------------------------------------------------------------

namespace {

constexpr std::pair<ConfigField, std::string_view> kFieldNames[] = {
    {ConfigField::lr_d, "lr_d"},
    {ConfigField::lr_g, "lr_g"},
    {ConfigField::opt_d, "opt_d"},
    {ConfigField::opt_g, "opt_g"},
    {ConfigField::loss, "loss"},
    {ConfigField::k_d, "k_d"},
    {ConfigField::k_g, "k_g"},
    {ConfigField::batch_size, "batch_size"},
    {ConfigField::noise_dist, "noise_dist"},
    {ConfigField::noise_dim, "noise_dim"},
    {ConfigField::gen_layers, "gen_layers"},
    {ConfigField::disc_layers, "disc_layers"},
    {ConfigField::saturating_generator_loss, "saturating_g"},
};

} // namespace

std::string_view to_string(ConfigField f)
{
    for (const auto& [field, name] : kFieldNames) {
        if (field == f) {
            return name;
        }
    }
    return "?";
}

ConfigField parse_config_field(std::string_view name)
{
    for (const auto& [field, n] : kFieldNames) {
        if (n == name) {
            return field;
        }
    }
    throw ConfigError("unknown config field '" + std::string(name) + "'");
}

GanConfig with_change(const GanConfig& config, const ConfigChange& change)
{
    GanConfig next = config;
    const auto& v = change.value;
    const auto f = change.field;
    switch (f) {
    case ConfigField::lr_d:
        next.optimizer_d.learning_rate = as_double(v, f);
        break;
    case ConfigField::lr_g:
        next.optimizer_g.learning_rate = as_double(v, f);
        break;
    case ConfigField::opt_d:
        next.optimizer_d.kind = parse_optimizer(as_string(v, f));
        break;
    case ConfigField::opt_g:
        next.optimizer_g.kind = parse_optimizer(as_string(v, f));
        break;
    case ConfigField::loss:
        next.loss = parse_loss(as_string(v, f));
        break;
    case ConfigField::k_d:
        next.k_d = as_int(v, f);
        break;
    case ConfigField::k_g:
        next.k_g = as_int(v, f);
        break;
    case ConfigField::batch_size:
        next.batch_size = as_int(v, f);
        break;
    case ConfigField::noise_dist:
        next.noise.dist = parse_noise_dist(as_string(v, f));
        break;
    case ConfigField::noise_dim:
        next.noise.dim = as_int(v, f);
        break;
    case ConfigField::gen_layers:
    case ConfigField::disc_layers: {
        std::vector<int> widths;
        if (const auto* list = std::get_if<std::vector<int>>(&v)) {
            widths = *list;
        } else if (const auto* text = std::get_if<std::string>(&v)) {
            widths = parse_hidden_layers(*text);
        } else {
            throw ConfigError(std::string(to_string(f)) + " expects a list of widths");
        }
        (f == ConfigField::gen_layers ? next.gen_hidden : next.disc_hidden) = std::move(widths);
        break;
    }
    case ConfigField::saturating_generator_loss: {
        const auto* flag = std::get_if<bool>(&v);
        if (flag == nullptr) {
            throw ConfigError("saturating_g expects a boolean");
        }
        next.saturating_generator_loss = *flag;
        break;
    }
    }
    next.validate();
    return next;
}

ConfigChangeEffect apply_config_change(GanModel& model, const ConfigChange& change)
{
    const GanConfig next = with_change(model.config, change);
    const GanConfig& prev = model.config;

    ConfigChangeEffect effect;
    effect.generator_reinitialized =
        next.gen_hidden != prev.gen_hidden || next.noise.dim != prev.noise.dim;
    effect.discriminator_reinitialized = next.disc_hidden != prev.disc_hidden;

    if (effect.generator_reinitialized) {
        model.generator = make_generator(next, model.rng());
    } else if (next.optimizer_g.kind != prev.optimizer_g.kind) {
        nn::reset_optimizer(model.generator);
    }
    if (effect.discriminator_reinitialized) {
        model.discriminator = make_discriminator(next, model.rng());
    } else if (next.optimizer_d.kind != prev.optimizer_d.kind) {
        nn::reset_optimizer(model.discriminator);
    }
    model.config = next;
    return effect;
}

} // namespace ganlab
