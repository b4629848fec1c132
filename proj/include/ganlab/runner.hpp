#pragma once

// Headless experiment runner behind the `ganlab` command-line tool.

#include "ganlab/distributions.hpp"
#include "ganlab/experiment.hpp"
#include "ganlab/gan.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ganlab {

struct RunSpec {
    GanConfig config{};
    Distribution distribution{};
    std::int64_t epochs = 1000;
    std::uint64_t seed = 0;
    int emit_every = 10;
    std::filesystem::path out_dir = ".";
    // Report the first recorded epoch whose JS divergence falls below this.
    std::optional<double> js_threshold;
    ViewOptions views{};
};

struct RunResult {
    bool ok = true;
    std::int64_t epochs_completed = 0;
    std::optional<std::int64_t> failed_epoch;
    std::string error;
    std::optional<std::int64_t> epochs_to_threshold;
    MetricsPoint final_metrics{};
    double best_js = 0.0;
    std::filesystem::path metrics_path;
    std::filesystem::path snapshot_path;
    std::filesystem::path summary_path;
};

// Trains for spec.epochs, recording metrics every emit_every epochs and at the
// final epoch. Writes metrics.csv, snapshot.json and summary.json to out_dir.
// Numerical failures stop the run and are reported in the result; files are
// still written for the epochs that completed.
RunResult run(const RunSpec& spec);

// Command-line entry point: parses flags, runs, prints a one-line summary.
// Returns 0 on success, 2 on usage errors, 3 on numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "1u", "2u", "1g", "2g".
NoiseSpec parse_noise_flag(const std::string& text);

} // namespace ganlab
