#include "ganlab/runner.hpp"

#include "ganlab/error.hpp"
#include "ganlab/protocol.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ganlab {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << content;
}

} // namespace

NoiseSpec parse_noise_flag(const std::string& text)
{
    if (text.size() != 2 || (text[0] != '1' && text[0] != '2') ||
        (text[1] != 'u' && text[1] != 'g')) {
        throw ConfigError("noise must be one of 1u, 2u, 1g, 2g");
    }
    return {text[0] - '0', text[1] == 'u' ? NoiseDistribution::uniform : NoiseDistribution::gaussian};
}

RunResult run(const RunSpec& spec)
{
    if (spec.epochs < 1) {
        throw ConfigError("epochs must be at least 1");
    }
    if (spec.emit_every < 1) {
        throw ConfigError("emit_every must be at least 1");
    }
    std::filesystem::create_directories(spec.out_dir);

    Experiment experiment(spec.config, spec.distribution, spec.seed, spec.views);
    RunResult result;
    result.best_js = std::numeric_limits<double>::infinity();

    auto note = [&](const MetricsPoint& p) {
        result.best_js = std::min(result.best_js, p.js);
        if (spec.js_threshold && !result.epochs_to_threshold && p.js < *spec.js_threshold) {
            result.epochs_to_threshold = p.epoch;
        }
    };

    for (std::int64_t e = 1; e <= spec.epochs; ++e) {
        try {
            experiment.train_epoch();
        } catch (const NumericalError& err) {
            result.ok = false;
            result.failed_epoch = e;
            result.error = err.what();
            break;
        }
        result.epochs_completed = e;
        if (e != spec.epochs && e % spec.emit_every == 0) {
            note(experiment.record_metrics());
        }
    }

    const TrainingSnapshot final = experiment.emit("headless");
    if (result.ok) {
        note(final.metrics);
    }
    result.final_metrics = final.metrics;

    result.metrics_path = spec.out_dir / "metrics.csv";
    result.snapshot_path = spec.out_dir / "snapshot.json";
    result.summary_path = spec.out_dir / "summary.json";

    std::ostringstream csv;
    write_metrics_csv(csv, experiment.history());
    write_file(result.metrics_path, csv.str());
    write_file(result.snapshot_path, protocol::snapshot_document(final));

    nlohmann::json summary = {
        {"status", result.ok ? "ok" : "numerical_failure"},
        {"seed", spec.seed},
        {"epochs", spec.epochs},
        {"epochs_completed", result.epochs_completed},
        {"failed_epoch", result.failed_epoch ? nlohmann::json(*result.failed_epoch) : nullptr},
        {"error", result.error},
        {"distribution", to_string(spec.distribution.kind)},
        {"config", protocol::config_to_json(spec.config)},
        {"js_threshold", spec.js_threshold ? nlohmann::json(*spec.js_threshold) : nullptr},
        {"epochs_to_threshold",
         result.epochs_to_threshold ? nlohmann::json(*result.epochs_to_threshold) : nullptr},
        {"final_kl", std::isfinite(final.metrics.kl) ? nlohmann::json(final.metrics.kl) : "inf"},
        {"final_js", final.metrics.js},
        {"best_js", result.best_js},
        {"fake_density", final.fake_density.mass},
    };
    write_file(result.summary_path, summary.dump(1) + "\n");
    return result;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Headless GAN training runner for 2D toy distributions", "ganlab"};

    RunSpec spec;
    std::string preset = "two_gaussians";
    std::string drawn_file;
    std::string loss = "log";
    std::string opt_d = "adam";
    std::string opt_g = "adam";
    std::string gen_layers = "1x14";
    std::string disc_layers = "1x14";
    std::string noise = "2u";
    std::string out_dir = ".";
    double js_threshold = -1.0;

    app.add_option("--preset", preset, "Real-data preset")
        ->check(CLI::IsMember({"line", "two_gaussians", "ring", "three_clusters", "grid_blobs"}));
    app.add_option("--drawn-file", drawn_file, "Text file of \"x y\" points (overrides --preset)")
        ->check(CLI::ExistingFile);
    app.add_option("--epochs", spec.epochs, "Number of epochs")->check(CLI::PositiveNumber);
    app.add_option("--seed", spec.seed, "Random seed");
    app.add_option("--emit-every", spec.emit_every, "Record metrics every N epochs")
        ->check(CLI::PositiveNumber);
    app.add_option("--loss", loss, "Loss function")->check(CLI::IsMember({"log", "ls"}));
    app.add_option("--opt-d", opt_d, "Discriminator optimizer")->check(CLI::IsMember({"sgd", "adam"}));
    app.add_option("--opt-g", opt_g, "Generator optimizer")->check(CLI::IsMember({"sgd", "adam"}));
    app.add_option("--lr-d", spec.config.optimizer_d.learning_rate, "Discriminator learning rate")
        ->check(CLI::PositiveNumber);
    app.add_option("--lr-g", spec.config.optimizer_g.learning_rate, "Generator learning rate")
        ->check(CLI::PositiveNumber);
    app.add_option("--kd", spec.config.k_d, "Discriminator updates per epoch")
        ->check(CLI::Range(1, kMaxLoopCount));
    app.add_option("--kg", spec.config.k_g, "Generator updates per epoch")
        ->check(CLI::Range(1, kMaxLoopCount));
    app.add_option("--batch", spec.config.batch_size, "Minibatch size")
        ->check(CLI::Range(2, kMaxBatchSize));
    app.add_option("--gen-layers", gen_layers, "Generator hidden layers, NxW");
    app.add_option("--disc-layers", disc_layers, "Discriminator hidden layers, NxW");
    app.add_option("--noise", noise, "Noise: 1u, 2u, 1g or 2g")
        ->check(CLI::IsMember({"1u", "2u", "1g", "2g"}));
    app.add_option("--out-dir", out_dir, "Output directory");
    app.add_option("--js-threshold", js_threshold,
                   "Report the first recorded epoch with JS below this value")
        ->check(CLI::PositiveNumber);

    std::vector<const char*> argv{"ganlab"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        spec.config.loss = loss == "log" ? LossKind::log_loss : LossKind::least_squares;
        spec.config.optimizer_d.kind = opt_d == "sgd" ? nn::OptimizerKind::sgd : nn::OptimizerKind::adam;
        spec.config.optimizer_g.kind = opt_g == "sgd" ? nn::OptimizerKind::sgd : nn::OptimizerKind::adam;
        spec.config.gen_hidden = parse_hidden_layers(gen_layers);
        spec.config.disc_hidden = parse_hidden_layers(disc_layers);
        spec.config.noise = parse_noise_flag(noise);
        spec.config.validate();
        if (!drawn_file.empty()) {
            std::ifstream in(drawn_file);
            spec.distribution = from_drawn_points(read_points(in));
        } else {
            spec.distribution = make_preset(parse_distribution_kind(preset));
        }
    } catch (const ConfigError& e) {
        err << "ganlab: " << e.what() << "\n";
        return 2;
    }
    spec.out_dir = out_dir;
    if (js_threshold > 0.0) {
        spec.js_threshold = js_threshold;
    }

    const RunResult result = run(spec);
    const auto& m = result.final_metrics;
    out << fmt::format("seed={} kd={} kg={} epochs={} d_loss={:.6f} g_loss={:.6f} kl={:.6f} "
                       "js={:.6f} best_js={:.6f} epochs_to_threshold={}\n",
                       spec.seed, spec.config.k_d, spec.config.k_g, result.epochs_completed,
                       m.d_loss, m.g_loss, m.kl, m.js, result.best_js,
                       result.epochs_to_threshold ? std::to_string(*result.epochs_to_threshold)
                                                  : std::string("none"));
    if (!result.ok) {
        err << "ganlab: numerical failure at epoch " << *result.failed_epoch << ": "
            << result.error << "\n";
        return 3;
    }
    return 0;
}

} // namespace ganlab
