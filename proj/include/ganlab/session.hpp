#pragma once

// Interactive steering: a single-writer state machine over an Experiment.
// The transport feeds it commands and calls tick() on its own schedule; the
// session itself never sleeps or spawns threads.

#include "ganlab/experiment.hpp"
#include "ganlab/snapshot.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ganlab {

enum class Mode { idle, running, paused, slow_motion };

std::string_view to_string(Mode m);

inline constexpr int kDefaultSlowTickMs = 800;

namespace cmd {
struct Play {};
struct Pause {};
struct StepBoth {};
struct StepDiscriminator {};
struct StepGenerator {};
struct SlowMotionOn {};
struct SlowMotionOff {};
// `field` is a ConfigField name, or one of the session settings
// "frame_interval" / "slow_tick_ms".
struct SetConfig {
    std::string field;
    ConfigValue value;
};
struct SetDistribution {
    Distribution distribution;
};
struct Reset {
    std::optional<std::uint64_t> seed; // keeps the current seed when empty
};
} // namespace cmd

using SessionCommand =
    std::variant<cmd::Play, cmd::Pause, cmd::StepBoth, cmd::StepDiscriminator, cmd::StepGenerator,
                 cmd::SlowMotionOn, cmd::SlowMotionOff, cmd::SetConfig, cmd::SetDistribution,
                 cmd::Reset>;

std::string_view command_name(const SessionCommand& command);

struct AckFrame {
    std::string command;
    std::string mode;

    bool operator==(const AckFrame&) const = default;
};

struct ErrorFrame {
    std::string code; // "transition", "config", "numerical", "decode", "internal"
    std::string message;

    bool operator==(const ErrorFrame&) const = default;
};

using Frame = std::variant<TrainingSnapshot, ErrorFrame, AckFrame>;

struct SessionOptions {
    GanConfig config{};
    Distribution distribution{};
    std::uint64_t seed = 0;
    int frame_interval = 1;
    int slow_tick_ms = kDefaultSlowTickMs;
    ViewOptions views{};
};

class Session {
public:
    explicit Session(SessionOptions options = {});

    // Applies one command. Rejected commands produce a single ErrorFrame and
    // leave the state untouched. Accepted commands produce an AckFrame,
    // followed by a snapshot when the visible state changed outside of
    // Running mode.
    std::vector<Frame> handle(const SessionCommand& command);

    // One scheduler tick: Running trains one epoch (snapshot every
    // frame_interval epochs); SlowMotion executes one phase and emits a
    // phase-tagged snapshot. Idle and Paused do nothing.
    std::vector<Frame> tick();

    // Delay before the next tick, or nullopt when the session should block
    // until the next command.
    std::optional<std::chrono::milliseconds> tick_delay() const;

    // Frame describing the current state, sent when a client connects.
    TrainingSnapshot current_snapshot() const;

    Mode mode() const { return mode_; }
    // Next phase to run; present exactly in SlowMotion.
    std::optional<PhaseTag> slow_phase() const;
    int frame_interval() const { return frame_interval_; }
    int slow_tick_ms() const { return slow_tick_ms_; }
    const Experiment& experiment() const { return experiment_; }
    const GanModel& model() const { return experiment_.model(); }
    const MetricsHistory& history() const { return experiment_.history(); }

private:
    std::vector<Frame> on(const cmd::Play&);
    std::vector<Frame> on(const cmd::Pause&);
    std::vector<Frame> on(const cmd::StepBoth&);
    std::vector<Frame> on(const cmd::StepDiscriminator&);
    std::vector<Frame> on(const cmd::StepGenerator&);
    std::vector<Frame> on(const cmd::SlowMotionOn&);
    std::vector<Frame> on(const cmd::SlowMotionOff&);
    std::vector<Frame> on(const cmd::SetConfig&);
    std::vector<Frame> on(const cmd::SetDistribution&);
    std::vector<Frame> on(const cmd::Reset&);

    std::vector<Frame> step(const char* name, Schedule schedule);
    // Completes an in-flight slow-motion epoch without emitting phase frames.
    void finish_slow_epoch();
    AckFrame ack(std::string_view command) const;
    TrainingSnapshot emit(std::optional<PhaseTag> phase = std::nullopt);

    Experiment experiment_;
    Mode mode_ = Mode::idle;
    int frame_interval_;
    int slow_tick_ms_;
    std::optional<EpochRunner> slow_runner_;
};

} // namespace ganlab
