#include "ganlab/session.hpp"

#include "ganlab/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace ganlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void reject(std::string_view command, Mode mode)
{
    throw TransitionError(
        fmt::format("{} is not allowed while {}", command, to_string(mode)));
}

int positive_setting(const ConfigValue& value, std::string_view name)
{
    const std::int64_t* i = std::get_if<std::int64_t>(&value);
    std::int64_t v = 0;
    if (i != nullptr) {
        v = *i;
    } else if (const double* d = std::get_if<double>(&value); d != nullptr && *d == std::floor(*d)) {
        v = static_cast<std::int64_t>(*d);
    } else {
        throw ConfigError(fmt::format("{} expects an integer", name));
    }
    if (v < 1 || v > 1'000'000) {
        throw ConfigError(fmt::format("{} must lie in [1, 1000000]", name));
    }
    return static_cast<int>(v);
}

} // namespace

std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::idle:
        return "idle";
    case Mode::running:
        return "running";
    case Mode::paused:
        return "paused";
    case Mode::slow_motion:
        return "slow_motion";
    }
    return "?";
}

std::string_view command_name(const SessionCommand& command)
{
    return std::visit(overloaded{
                          [](const cmd::Play&) { return std::string_view("Play"); },
                          [](const cmd::Pause&) { return std::string_view("Pause"); },
                          [](const cmd::StepBoth&) { return std::string_view("StepBoth"); },
                          [](const cmd::StepDiscriminator&) {
                              return std::string_view("StepDiscriminator");
                          },
                          [](const cmd::StepGenerator&) { return std::string_view("StepGenerator"); },
                          [](const cmd::SlowMotionOn&) { return std::string_view("SlowMotionOn"); },
                          [](const cmd::SlowMotionOff&) { return std::string_view("SlowMotionOff"); },
                          [](const cmd::SetConfig&) { return std::string_view("SetConfig"); },
                          [](const cmd::SetDistribution&) {
                              return std::string_view("SetDistribution");
                          },
                          [](const cmd::Reset&) { return std::string_view("Reset"); },
                      },
                      command);
}

Session::Session(SessionOptions options)
    : experiment_(options.config, options.distribution, options.seed, options.views),
      frame_interval_(options.frame_interval), slow_tick_ms_(options.slow_tick_ms)
{
    if (frame_interval_ < 1) {
        throw ConfigError("frame_interval must be at least 1");
    }
    if (slow_tick_ms_ < 1) {
        throw ConfigError("slow_tick_ms must be at least 1");
    }
}

std::vector<Frame> Session::handle(const SessionCommand& command)
{
    try {
        return std::visit([this](const auto& c) { return on(c); }, command);
    } catch (const TransitionError& e) {
        return {ErrorFrame{"transition", e.what()}};
    } catch (const ConfigError& e) {
        return {ErrorFrame{"config", e.what()}};
    } catch (const NumericalError& e) {
        return {ErrorFrame{"numerical", e.what()}};
    }
}

std::optional<PhaseTag> Session::slow_phase() const
{
    if (mode_ != Mode::slow_motion) {
        return std::nullopt;
    }
    if (slow_runner_) {
        return slow_runner_->next_phase();
    }
    const Schedule s = schedule_for(model().config);
    return PhaseTag{s.discriminator_steps > 0 ? Submodel::discriminator : Submodel::generator,
                    Phase::run_generator, 0};
}

std::optional<std::chrono::milliseconds> Session::tick_delay() const
{
    switch (mode_) {
    case Mode::running:
        return std::chrono::milliseconds(0);
    case Mode::slow_motion:
        return std::chrono::milliseconds(slow_tick_ms_);
    case Mode::idle:
    case Mode::paused:
        break;
    }
    return std::nullopt;
}

TrainingSnapshot Session::current_snapshot() const
{
    // In slow motion the frame is tagged with the phase that will run next.
    return experiment_.snapshot(std::string(to_string(mode_)), slow_phase());
}

AckFrame Session::ack(std::string_view command) const
{
    return {std::string(command), std::string(to_string(mode_))};
}

TrainingSnapshot Session::emit(std::optional<PhaseTag> phase)
{
    return experiment_.emit(std::string(to_string(mode_)), phase);
}

std::vector<Frame> Session::tick()
{
    if (mode_ == Mode::running) {
        try {
            experiment_.train_epoch();
        } catch (const NumericalError& e) {
            mode_ = Mode::paused;
            return {ErrorFrame{"numerical",
                               fmt::format("epoch {}: {}", model().epoch + 1, e.what())}};
        }
        if (model().epoch % frame_interval_ == 0) {
            return {emit()};
        }
        return {};
    }

    if (mode_ == Mode::slow_motion) {
        if (!slow_runner_) {
            slow_runner_.emplace(schedule_for(model().config));
        }
        PhaseTag tag;
        try {
            tag = slow_runner_->advance(experiment_.model(), experiment_.distribution());
        } catch (const NumericalError& e) {
            slow_runner_.reset();
            mode_ = Mode::paused;
            return {ErrorFrame{"numerical",
                               fmt::format("epoch {}: {}", model().epoch + 1, e.what())}};
        }
        if (slow_runner_->finished()) {
            experiment_.set_last_stats(slow_runner_->stats());
            slow_runner_.reset();
            return {emit(tag)};
        }
        return {experiment_.snapshot(std::string(to_string(mode_)), tag)};
    }
    return {};
}

void Session::finish_slow_epoch()
{
    if (!slow_runner_) {
        return;
    }
    GanModel working = experiment_.model();
    EpochRunner runner = *slow_runner_;
    slow_runner_.reset();
    runner.run_to_end(working, experiment_.distribution());
    experiment_.model() = std::move(working);
    experiment_.set_last_stats(runner.stats());
    experiment_.record_metrics();
}

std::vector<Frame> Session::on(const cmd::Play&)
{
    if (mode_ != Mode::idle && mode_ != Mode::paused) {
        reject("Play", mode_);
    }
    mode_ = Mode::running;
    return {ack("Play")};
}

std::vector<Frame> Session::on(const cmd::Pause&)
{
    if (mode_ != Mode::running && mode_ != Mode::slow_motion) {
        reject("Pause", mode_);
    }
    std::vector<Frame> frames;
    try {
        finish_slow_epoch();
    } catch (const NumericalError& e) {
        frames.emplace_back(ErrorFrame{"numerical", e.what()});
    }
    mode_ = Mode::paused;
    frames.emplace_back(ack("Pause"));
    frames.emplace_back(current_snapshot());
    return frames;
}

std::vector<Frame> Session::step(const char* name, Schedule schedule)
{
    if (mode_ != Mode::idle && mode_ != Mode::paused) {
        reject(name, mode_);
    }
    experiment_.train_epoch(schedule);
    return {ack(name), emit()};
}

std::vector<Frame> Session::on(const cmd::StepBoth&)
{
    return step("StepBoth", schedule_for(model().config));
}

std::vector<Frame> Session::on(const cmd::StepDiscriminator&)
{
    return step("StepDiscriminator", {model().config.k_d, 0});
}

std::vector<Frame> Session::on(const cmd::StepGenerator&)
{
    return step("StepGenerator", {0, model().config.k_g});
}

std::vector<Frame> Session::on(const cmd::SlowMotionOn&)
{
    if (mode_ == Mode::slow_motion) {
        reject("SlowMotionOn", mode_);
    }
    mode_ = Mode::slow_motion;
    return {ack("SlowMotionOn")};
}

std::vector<Frame> Session::on(const cmd::SlowMotionOff&)
{
    if (mode_ != Mode::slow_motion) {
        reject("SlowMotionOff", mode_);
    }
    std::vector<Frame> frames;
    try {
        finish_slow_epoch();
        mode_ = Mode::running;
    } catch (const NumericalError& e) {
        mode_ = Mode::paused;
        frames.emplace_back(ErrorFrame{"numerical", e.what()});
    }
    frames.emplace_back(ack("SlowMotionOff"));
    return frames;
}

std::vector<Frame> Session::on(const cmd::SetConfig& c)
{
    if (c.field == "frame_interval") {
        frame_interval_ = positive_setting(c.value, c.field);
        return {ack("SetConfig")};
    }
    if (c.field == "slow_tick_ms") {
        slow_tick_ms_ = positive_setting(c.value, c.field);
        return {ack("SetConfig")};
    }
    const ConfigChangeEffect effect = experiment_.apply({parse_config_field(c.field), c.value});
    if (effect.generator_reinitialized || effect.discriminator_reinitialized) {
        // The in-flight step holds caches for the old network shapes.
        slow_runner_.reset();
    }
    std::vector<Frame> frames{ack("SetConfig")};
    if (mode_ == Mode::idle || mode_ == Mode::paused) {
        frames.emplace_back(current_snapshot());
    }
    return frames;
}

std::vector<Frame> Session::on(const cmd::SetDistribution& c)
{
    experiment_.set_distribution(c.distribution);
    std::vector<Frame> frames{ack("SetDistribution")};
    if (mode_ == Mode::idle || mode_ == Mode::paused) {
        frames.emplace_back(current_snapshot());
    }
    return frames;
}

std::vector<Frame> Session::on(const cmd::Reset& c)
{
    experiment_.reset(c.seed.value_or(experiment_.seed()));
    slow_runner_.reset();
    mode_ = Mode::idle;
    return {ack("Reset"), current_snapshot()};
}

} // namespace ganlab
