#include "ganlab/protocol.hpp"

#include "ganlab/error.hpp"

#include <cmath>
#include <limits>

namespace ganlab::protocol {

using nlohmann::json;

namespace {

json real(double v)
{
    if (std::isfinite(v)) {
        return v;
    }
    if (std::isnan(v)) {
        return "nan";
    }
    return v > 0 ? "inf" : "-inf";
}

double real_from(const json& j)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (s == "-inf") {
            return -std::numeric_limits<double>::infinity();
        }
        if (s == "nan") {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }
    throw DecodeError("expected a number, got " + j.dump());
}

json reals(const std::vector<double>& values)
{
    json out = json::array();
    for (double v : values) {
        out.push_back(real(v));
    }
    return out;
}

std::vector<double> reals_from(const json& j)
{
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j.get_ref<const json::array_t&>()) {
        out.push_back(real_from(v));
    }
    return out;
}

json points(const std::vector<Point2>& pts)
{
    json out = json::array();
    for (const auto& p : pts) {
        out.push_back(json::array({real(p[0]), real(p[1])}));
    }
    return out;
}

std::vector<Point2> points_from(const json& j)
{
    std::vector<Point2> out;
    out.reserve(j.size());
    for (const auto& p : j.get_ref<const json::array_t&>()) {
        if (!p.is_array() || p.size() != 2) {
            throw DecodeError("points must be [x, y] pairs");
        }
        out.push_back({real_from(p[0]), real_from(p[1])});
    }
    return out;
}

template <typename Enum, std::size_t N>
Enum enum_from(const json& j, const std::array<Enum, N>& values)
{
    const auto& s = j.get_ref<const std::string&>();
    for (Enum e : values) {
        if (to_string(e) == s) {
            return e;
        }
    }
    throw DecodeError("unknown value '" + s + "'");
}

json optimizer_to_json(const nn::OptimizerSpec& o)
{
    return {{"kind", nn::to_string(o.kind)},
            {"lr", real(o.learning_rate)},
            {"beta1", real(o.adam_beta1)},
            {"beta2", real(o.adam_beta2)},
            {"epsilon", real(o.adam_epsilon)}};
}

nn::OptimizerSpec optimizer_from_json(const json& j)
{
    nn::OptimizerSpec o;
    o.kind = enum_from(j.at("kind"), std::array{nn::OptimizerKind::sgd, nn::OptimizerKind::adam});
    o.learning_rate = real_from(j.at("lr"));
    o.adam_beta1 = real_from(j.at("beta1"));
    o.adam_beta2 = real_from(j.at("beta2"));
    o.adam_epsilon = real_from(j.at("epsilon"));
    return o;
}

json phase_to_json(const PhaseTag& tag)
{
    return {{"submodel", to_string(tag.submodel)},
            {"phase", static_cast<int>(tag.phase)},
            {"phase_name", to_string(tag.phase)},
            {"step_index", tag.step_index}};
}

PhaseTag phase_from_json(const json& j)
{
    PhaseTag tag;
    tag.submodel = enum_from(j.at("submodel"),
                             std::array{Submodel::discriminator, Submodel::generator});
    const int phase = j.at("phase").get<int>();
    if (phase < 1 || phase > kPhaseCount) {
        throw DecodeError("phase must lie in 1..5");
    }
    tag.phase = static_cast<Phase>(phase);
    tag.step_index = j.at("step_index").get<int>();
    return tag;
}

json metrics_to_json(const MetricsPoint& m)
{
    return {{"epoch", m.epoch},
            {"d_loss", real(m.d_loss)},
            {"g_loss", real(m.g_loss)},
            {"kl", real(m.kl)},
            {"js", real(m.js)}};
}

MetricsPoint metrics_from_json(const json& j)
{
    return {j.at("epoch").get<std::int64_t>(), real_from(j.at("d_loss")),
            real_from(j.at("g_loss")), real_from(j.at("kl")), real_from(j.at("js"))};
}

DensityGrid density_from_json(const json& j)
{
    DensityGrid g;
    g.resolution = j.at("resolution").get<int>();
    g.mass = reals_from(j.at("mass"));
    if (g.resolution < 1 || g.mass.size() != static_cast<std::size_t>(g.resolution) * g.resolution) {
        throw DecodeError("density grid size does not match its resolution");
    }
    return g;
}

json config_value_to_json(const ConfigValue& v)
{
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, double>) {
                return real(x);
            } else {
                return x;
            }
        },
        v);
}

ConfigValue config_value_from_json(const json& j)
{
    if (j.is_boolean()) {
        return j.get<bool>();
    }
    if (j.is_number_integer()) {
        return j.get<std::int64_t>();
    }
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    if (j.is_array()) {
        std::vector<int> widths;
        for (const auto& w : j) {
            if (!w.is_number_integer()) {
                throw DecodeError("layer widths must be integers");
            }
            widths.push_back(w.get<int>());
        }
        return widths;
    }
    throw DecodeError("unsupported config value " + j.dump());
}

json parse(std::string_view text)
{
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw DecodeError(std::string("malformed message: ") + e.what());
    }
}

template <typename F>
auto guarded(F&& f)
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw DecodeError(std::string("malformed message: ") + e.what());
    }
}

} // namespace

json config_to_json(const GanConfig& c)
{
    return {{"gen_layers", c.gen_hidden},
            {"disc_layers", c.disc_hidden},
            {"opt_d", optimizer_to_json(c.optimizer_d)},
            {"opt_g", optimizer_to_json(c.optimizer_g)},
            {"loss", to_string(c.loss)},
            {"k_d", c.k_d},
            {"k_g", c.k_g},
            {"batch_size", c.batch_size},
            {"noise", {{"dim", c.noise.dim}, {"dist", to_string(c.noise.dist)}}},
            {"saturating_g", c.saturating_generator_loss}};
}

GanConfig config_from_json(const json& j)
{
    return guarded([&] {
        GanConfig c;
        c.gen_hidden = j.at("gen_layers").get<std::vector<int>>();
        c.disc_hidden = j.at("disc_layers").get<std::vector<int>>();
        c.optimizer_d = optimizer_from_json(j.at("opt_d"));
        c.optimizer_g = optimizer_from_json(j.at("opt_g"));
        c.loss = enum_from(j.at("loss"), std::array{LossKind::log_loss, LossKind::least_squares});
        c.k_d = j.at("k_d").get<int>();
        c.k_g = j.at("k_g").get<int>();
        c.batch_size = j.at("batch_size").get<int>();
        c.noise.dim = j.at("noise").at("dim").get<int>();
        c.noise.dist = enum_from(j.at("noise").at("dist"),
                                 std::array{NoiseDistribution::uniform, NoiseDistribution::gaussian});
        c.saturating_generator_loss = j.at("saturating_g").get<bool>();
        return c;
    });
}

json snapshot_to_json(const TrainingSnapshot& s)
{
    const auto& m = s.manifold;
    json flags = json::array();
    for (bool f : m.cell_flags) {
        flags.push_back(f ? 1 : 0);
    }
    return {
        {"epoch", s.epoch},
        {"mode", s.mode},
        {"distribution", s.distribution},
        {"real_samples", points(s.real_samples)},
        {"fake_samples", points(s.fake_samples)},
        {"real_scores", reals(s.real_scores)},
        {"fake_scores", reals(s.fake_scores)},
        {"fake_sample_movements", points(s.fake_sample_movements)},
        {"manifold",
         {{"resolution", m.resolution},
          {"noise_dim", m.noise_dim},
          {"corners", points(m.corners)},
          {"cell_mass", reals(m.cell_mass)},
          {"cell_density", reals(m.cell_density)},
          {"cell_flags", flags}}},
        {"heatmap", {{"resolution", s.heatmap.resolution}, {"scores", reals(s.heatmap.scores)}}},
        {"real_density",
         {{"resolution", s.real_density.resolution}, {"mass", reals(s.real_density.mass)}}},
        {"fake_density",
         {{"resolution", s.fake_density.resolution}, {"mass", reals(s.fake_density.mass)}}},
        {"metrics", metrics_to_json(s.metrics)},
        {"slow_phase", s.slow_phase ? phase_to_json(*s.slow_phase) : json(nullptr)},
        {"config", config_to_json(s.config)},
    };
}

TrainingSnapshot snapshot_from_json(const json& j)
{
    return guarded([&] {
        TrainingSnapshot s;
        s.epoch = j.at("epoch").get<std::int64_t>();
        s.mode = j.at("mode").get<std::string>();
        s.distribution = j.at("distribution").get<std::string>();
        s.real_samples = points_from(j.at("real_samples"));
        s.fake_samples = points_from(j.at("fake_samples"));
        s.real_scores = reals_from(j.at("real_scores"));
        s.fake_scores = reals_from(j.at("fake_scores"));
        s.fake_sample_movements = points_from(j.at("fake_sample_movements"));

        const auto& mj = j.at("manifold");
        auto& m = s.manifold;
        m.resolution = mj.at("resolution").get<int>();
        m.noise_dim = mj.at("noise_dim").get<int>();
        m.corners = points_from(mj.at("corners"));
        m.cell_mass = reals_from(mj.at("cell_mass"));
        m.cell_density = reals_from(mj.at("cell_density"));
        for (const auto& f : mj.at("cell_flags")) {
            m.cell_flags.push_back(f.get<int>() != 0);
        }
        if (m.resolution < 2 || (m.noise_dim != 1 && m.noise_dim != 2)) {
            throw DecodeError("invalid manifold header");
        }
        const auto side = static_cast<std::size_t>(m.resolution) + 1;
        const auto cells = static_cast<std::size_t>(m.cell_count());
        if (m.corners.size() != (m.noise_dim == 2 ? side * side : side) ||
            m.cell_mass.size() != cells || m.cell_density.size() != cells ||
            m.cell_flags.size() != cells) {
            throw DecodeError("manifold arrays do not match its resolution");
        }

        const auto& hj = j.at("heatmap");
        s.heatmap.resolution = hj.at("resolution").get<int>();
        s.heatmap.scores = reals_from(hj.at("scores"));
        if (s.heatmap.resolution < 1 ||
            s.heatmap.scores.size() !=
                static_cast<std::size_t>(s.heatmap.resolution) * s.heatmap.resolution) {
            throw DecodeError("heatmap size does not match its resolution");
        }
        s.real_density = density_from_json(j.at("real_density"));
        s.fake_density = density_from_json(j.at("fake_density"));
        s.metrics = metrics_from_json(j.at("metrics"));
        if (const auto& p = j.at("slow_phase"); !p.is_null()) {
            s.slow_phase = phase_from_json(p);
        }
        s.config = config_from_json(j.at("config"));
        return s;
    });
}

std::string encode_frame(const Frame& frame)
{
    json j = std::visit(
        [](const auto& f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, TrainingSnapshot>) {
                return {{"kind", "snapshot"}, {"payload", snapshot_to_json(f)}};
            } else if constexpr (std::is_same_v<T, ErrorFrame>) {
                return {{"kind", "error"}, {"payload", {{"code", f.code}, {"message", f.message}}}};
            } else {
                return {{"kind", "ack"}, {"payload", {{"command", f.command}, {"mode", f.mode}}}};
            }
        },
        frame);
    return j.dump();
}

Frame decode_frame(std::string_view text)
{
    const json j = parse(text);
    return guarded([&]() -> Frame {
        const auto& kind = j.at("kind").get_ref<const std::string&>();
        const auto& payload = j.at("payload");
        if (kind == "snapshot") {
            return snapshot_from_json(payload);
        }
        if (kind == "error") {
            return ErrorFrame{payload.at("code").get<std::string>(),
                              payload.at("message").get<std::string>()};
        }
        if (kind == "ack") {
            return AckFrame{payload.at("command").get<std::string>(),
                            payload.at("mode").get<std::string>()};
        }
        throw DecodeError("unknown frame kind '" + kind + "'");
    });
}

std::string encode_command(const SessionCommand& command)
{
    json args = json::object();
    if (const auto* c = std::get_if<cmd::SetConfig>(&command)) {
        args = {{"field", c->field}, {"value", config_value_to_json(c->value)}};
    } else if (const auto* c = std::get_if<cmd::SetDistribution>(&command)) {
        args["kind"] = to_string(c->distribution.kind);
        if (c->distribution.kind == DistributionKind::drawn) {
            args["points"] = points(c->distribution.drawn_points);
            args["jitter"] = real(c->distribution.drawn_jitter);
        }
    } else if (const auto* c = std::get_if<cmd::Reset>(&command)) {
        if (c->seed) {
            args["seed"] = *c->seed;
        }
    }
    return json{{"kind", "command"}, {"name", command_name(command)}, {"args", args}}.dump();
}

SessionCommand decode_command(std::string_view text)
{
    const json j = parse(text);
    return guarded([&]() -> SessionCommand {
        if (j.at("kind") != "command") {
            throw DecodeError("expected a command message");
        }
        const auto& name = j.at("name").get_ref<const std::string&>();
        const json args = j.contains("args") ? j.at("args") : json::object();
        if (!args.is_object()) {
            throw DecodeError("command args must be an object");
        }
        if (name == "Play") {
            return cmd::Play{};
        }
        if (name == "Pause") {
            return cmd::Pause{};
        }
        if (name == "StepBoth") {
            return cmd::StepBoth{};
        }
        if (name == "StepDiscriminator") {
            return cmd::StepDiscriminator{};
        }
        if (name == "StepGenerator") {
            return cmd::StepGenerator{};
        }
        if (name == "SlowMotionOn") {
            return cmd::SlowMotionOn{};
        }
        if (name == "SlowMotionOff") {
            return cmd::SlowMotionOff{};
        }
        if (name == "SetConfig") {
            return cmd::SetConfig{args.at("field").get<std::string>(),
                                  config_value_from_json(args.at("value"))};
        }
        if (name == "SetDistribution") {
            const auto kind = parse_distribution_kind(args.at("kind").get<std::string>());
            if (kind != DistributionKind::drawn) {
                return cmd::SetDistribution{make_preset(kind)};
            }
            const double jitter =
                args.contains("jitter") ? real_from(args.at("jitter")) : kDefaultDrawnJitter;
            return cmd::SetDistribution{from_drawn_points(points_from(args.at("points")), jitter)};
        }
        if (name == "Reset") {
            cmd::Reset reset;
            if (args.contains("seed")) {
                reset.seed = args.at("seed").get<std::uint64_t>();
            }
            return reset;
        }
        throw DecodeError("unknown command '" + name + "'");
    });
}

std::string snapshot_document(const TrainingSnapshot& snapshot)
{
    return snapshot_to_json(snapshot).dump(1) + "\n";
}

} // namespace ganlab::protocol
