#pragma once

// GAN assembly over two nn::MlpModel networks: noise sampling, losses,
// five-phase discriminator/generator steps, the k-loop epoch schedule and
// live hyperparameter edits.

#include "ganlab/distributions.hpp"
#include "ganlab/nn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ganlab {

enum class NoiseDistribution { uniform, gaussian };

// Gaussian noise is N(0.5, 0.2^2) clamped to [0,1] per coordinate.
inline constexpr double kGaussianNoiseMean = 0.5;
inline constexpr double kGaussianNoiseStddev = 0.2;

struct NoiseSpec {
    int dim = 2; // 1 or 2
    NoiseDistribution dist = NoiseDistribution::uniform;

    bool operator==(const NoiseSpec&) const = default;
};

enum class LossKind { log_loss, least_squares };

// Parses "NxW" (N hidden layers of width W, e.g. "1x14") or a comma list of
// widths ("14,8"). Throws ConfigError.
std::vector<int> parse_hidden_layers(std::string_view text);
std::string format_hidden_layers(const std::vector<int>& widths);

std::string_view to_string(NoiseDistribution d);
std::string_view to_string(LossKind k);

// Upper bounds accepted for user-editable sizes.
inline constexpr int kMaxHiddenLayers = 8;
inline constexpr int kMaxLayerWidth = 512;
inline constexpr int kMaxBatchSize = 10000;
inline constexpr int kMaxLoopCount = 100;

struct GanConfig {
    std::vector<int> gen_hidden{14};
    std::vector<int> disc_hidden{14};
    nn::OptimizerSpec optimizer_d{};
    nn::OptimizerSpec optimizer_g{};
    LossKind loss = LossKind::log_loss;
    int k_d = 1;
    int k_g = 1;
    int batch_size = 64;
    NoiseSpec noise{};
    // Minimax generator objective log(1 - D(G(z))) instead of -log D(G(z)).
    bool saturating_generator_loss = false;

    bool operator==(const GanConfig&) const = default;

    // Throws ConfigError describing the first invalid field.
    void validate() const;
};

struct GanModel {
    nn::MlpModel generator;     // noise.dim -> ... -> 2, sigmoid output
    nn::MlpModel discriminator; // 2 -> ... -> 1, sigmoid output
    GanConfig config;
    std::int64_t epoch = 0;
    Rng rng;
};

GanModel make_gan(const GanConfig& config, std::uint64_t seed);

nn::MlpModel make_generator(const GanConfig& config, std::uint64_t seed);
nn::MlpModel make_discriminator(const GanConfig& config, std::uint64_t seed);

struct StepStats {
    double d_loss = 0.0;
    double g_loss = 0.0;
    nn::Batch fake_samples;          // n x 2
    nn::Batch real_scores;           // n x 1, empty for generator-only steps
    nn::Batch fake_scores;           // n x 1
    nn::Batch fake_sample_movements; // n x 2, empty for discriminator steps
};

// n x dim batch in [0,1]^dim.
nn::Batch sample_noise(const NoiseSpec& spec, int n, Rng& rng);

// Losses are batch means. Scores outside (0,1) make the log loss infinite;
// callers treat that as a numerical failure.
double discriminator_loss(const nn::Batch& real_scores, const nn::Batch& fake_scores,
                          LossKind loss);
double generator_loss(const nn::Batch& fake_scores, LossKind loss, bool saturating = false);

// Per-example derivatives of the losses above with respect to each score.
struct DiscriminatorLossGrads {
    nn::Batch real;
    nn::Batch fake;
};
DiscriminatorLossGrads discriminator_loss_grads(const nn::Batch& real_scores,
                                                const nn::Batch& fake_scores, LossKind loss);
nn::Batch generator_loss_grads(const nn::Batch& fake_scores, LossKind loss,
                               bool saturating = false);

enum class Submodel { discriminator, generator };

// The five phases of one submodel update, in execution order.
enum class Phase { run_generator = 1, run_discriminator, compute_loss, compute_gradients, update };

inline constexpr int kPhaseCount = 5;

std::string_view to_string(Submodel s);
std::string_view to_string(Phase p);

// One submodel update split into its five phases so that slow-motion playback
// and the batch training path execute the same code. Every phase except
// `update` leaves the model untouched; a phase that throws leaves the model
// as it was before that phase.
class TrainingStep {
public:
    // real_batch may be empty for generator steps.
    TrainingStep(Submodel which, nn::Batch real_batch, nn::Batch noise_batch);

    Submodel submodel() const { return which_; }
    bool finished() const { return next_ == 0; }
    // Phase that advance() will execute next. Requires !finished().
    Phase next_phase() const;

    Phase advance(GanModel& model);
    void run_to_end(GanModel& model);

    const StepStats& stats() const { return stats_; }

private:
    void run_generator(const GanModel& model);
    void run_discriminator(const GanModel& model);
    void compute_loss(const GanModel& model);
    void compute_gradients(const GanModel& model);
    void update(GanModel& model);

    Submodel which_;
    nn::Batch real_batch_;
    nn::Batch noise_batch_;
    int next_ = 1; // 0 once finished

    nn::ForwardCache generator_cache_;
    nn::ForwardCache real_cache_;
    nn::ForwardCache fake_cache_;
    nn::Gradients grads_;
    StepStats stats_;
};

// Generator frozen; updates the discriminator with optimizer_d.
StepStats train_discriminator_step(GanModel& model, const nn::Batch& real_batch,
                                   const nn::Batch& noise_batch);

// Discriminator frozen; updates the generator with optimizer_g. Movements are
// taken at the pre-update generator output.
StepStats train_generator_step(GanModel& model, const nn::Batch& noise_batch);

struct Schedule {
    int discriminator_steps = 1;
    int generator_steps = 1;
};

struct PhaseTag {
    Submodel submodel = Submodel::discriminator;
    Phase phase = Phase::run_generator;
    int step_index = 0; // within this submodel's loop

    bool operator==(const PhaseTag&) const = default;
};

// Drives one epoch: `discriminator_steps` discriminator updates followed by
// `generator_steps` generator updates, drawing fresh batches from model.rng at
// the start of every step. The epoch counter advances when the final phase
// completes.
class EpochRunner {
public:
    explicit EpochRunner(Schedule schedule);

    bool finished() const;
    // Phase the next advance() will run. Requires !finished().
    PhaseTag next_phase() const;

    PhaseTag advance(GanModel& model, const Distribution& source);
    void run_to_end(GanModel& model, const Distribution& source);

    // Final generator step stats plus the final discriminator loss.
    const StepStats& stats() const { return stats_; }
    int updates_applied() const { return updates_; }

private:
    Schedule schedule_;
    int steps_started_ = 0;
    std::optional<TrainingStep> current_;
    StepStats stats_;
    int updates_ = 0;
    bool finished_ = false;
};

Schedule schedule_for(const GanConfig& config);

// One full epoch with the config's k_d/k_g. On error the model is unchanged.
StepStats train_epoch(GanModel& model, const Distribution& source);

// Runs `schedule` as one epoch (the counter still advances by one).
StepStats train_epoch(GanModel& model, const Distribution& source, Schedule schedule);

// Scores, losses and movements for the current model on the given batches,
// without touching parameters.
StepStats evaluate(const GanModel& model, const nn::Batch& real_batch,
                   const nn::Batch& noise_batch);

enum class ConfigField {
    lr_d,
    lr_g,
    opt_d,
    opt_g,
    loss,
    k_d,
    k_g,
    batch_size,
    noise_dist,
    noise_dim,
    gen_layers,
    disc_layers,
    saturating_generator_loss,
};

std::string_view to_string(ConfigField f);
// Throws ConfigError on unknown names.
ConfigField parse_config_field(std::string_view name);

// Values: double (rates), int64 (counts and sizes, noise dim), string
// ("sgd"/"adam", "log"/"ls", "uniform"/"gaussian"), vector<int> or an
// "NxW" string (hidden widths), bool (saturating switch).
using ConfigValue = std::variant<double, std::int64_t, std::string, std::vector<int>, bool>;

struct ConfigChange {
    ConfigField field;
    ConfigValue value;
};

struct ConfigChangeEffect {
    bool generator_reinitialized = false;
    bool discriminator_reinitialized = false;
};

// Produces the config with one field edited. Throws ConfigError if the value
// has the wrong type or the resulting config is invalid.
GanConfig with_change(const GanConfig& config, const ConfigChange& change);

// Applies an edit in place. Rates, optimizer kinds, loss, loop counts, batch
// size and noise distribution keep all parameters (optimizer moments reset on
// a kind change). Layer or noise-dimension edits reinitialize the affected
// network from a seed drawn from model.rng. Invalid edits leave the model
// unchanged.
ConfigChangeEffect apply_config_change(GanModel& model, const ConfigChange& change);

} // namespace ganlab
