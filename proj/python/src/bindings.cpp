#include "ganlab/distributions.hpp"
#include "ganlab/error.hpp"
#include "ganlab/metrics.hpp"
#include "ganlab/protocol.hpp"
#include "ganlab/runner.hpp"
#include "ganlab/session.hpp"
#include "ganlab/viz.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ganlab;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DensityGrid to_grid(const RowMatrix& m)
{
    if (m.rows() != m.cols()) {
        throw ShapeError("density grids must be square");
    }
    DensityGrid g;
    g.resolution = static_cast<int>(m.rows());
    g.mass.assign(m.data(), m.data() + m.size());
    return g;
}

RowMatrix from_grid(const DensityGrid& g)
{
    return Eigen::Map<const RowMatrix>(g.mass.data(), g.resolution, g.resolution);
}

Distribution distribution_from(const std::string& name, const std::optional<RowMatrix>& points,
                               double jitter)
{
    if (name != "drawn") {
        return make_preset(parse_distribution_kind(name));
    }
    if (!points || points->cols() != 2) {
        throw ConfigError("a drawn distribution needs an (n, 2) array of points");
    }
    std::vector<Point2> pts;
    for (Eigen::Index i = 0; i < points->rows(); ++i) {
        pts.push_back({(*points)(i, 0), (*points)(i, 1)});
    }
    return from_drawn_points(std::move(pts), jitter);
}

std::vector<std::string> encode_all(const std::vector<Frame>& frames)
{
    std::vector<std::string> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        out.push_back(protocol::encode_frame(f));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_ganlab, m)
{
    m.doc() = "Interactive GAN lab engine for 2D toy data";

    auto base = py::register_exception<Error>(m, "GanlabError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<DecodeError>(m, "DecodeError", base.ptr());
    py::register_exception<TransitionError>(m, "TransitionError", base.ptr());

    m.def(
        "sample",
        [](const std::string& kind, int n, std::uint64_t seed, std::optional<RowMatrix> points,
           double jitter) -> RowMatrix {
            Rng rng(seed);
            return sample_real(distribution_from(kind, points, jitter), n, rng);
        },
        py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("points") = py::none(),
        py::arg("jitter") = kDefaultDrawnJitter,
        "Draw n real samples (n x 2) from a preset or a drawn point set.");

    m.def(
        "density_grid",
        [](const RowMatrix& samples, int resolution) {
            return from_grid(density_grid(samples, resolution));
        },
        py::arg("samples"), py::arg("resolution") = kDefaultDensityResolution,
        "Normalized 2D histogram over the unit square; row indexes y.");

    m.def(
        "kl_divergence",
        [](const RowMatrix& p, const RowMatrix& q) { return kl_divergence(to_grid(p), to_grid(q)); },
        py::arg("p"), py::arg("q"));
    m.def(
        "js_divergence",
        [](const RowMatrix& p, const RowMatrix& q) { return js_divergence(to_grid(p), to_grid(q)); },
        py::arg("p"), py::arg("q"));

    m.def(
        "quad_area",
        [](const RowMatrix& c) {
            if (c.rows() != 4 || c.cols() != 2) {
                throw ShapeError("quad_area expects a (4, 2) array");
            }
            return quad_area(Point2{c(0, 0), c(0, 1)}, Point2{c(1, 0), c(1, 1)},
                             Point2{c(2, 0), c(2, 1)}, Point2{c(3, 0), c(3, 1)});
        },
        py::arg("corners"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the headless trainer with command-line flags; returns (code, stdout, stderr).");

    m.def(
        "decode_frame",
        [](const std::string& text) { return protocol::encode_frame(protocol::decode_frame(text)); },
        py::arg("text"), "Validate a frame and return its canonical encoding.");

    py::class_<Session>(m, "Session")
        .def(py::init([](std::uint64_t seed, const std::string& kind, int frame_interval,
                         const std::string& config_json, std::optional<RowMatrix> points) {
                 SessionOptions o;
                 o.seed = seed;
                 o.frame_interval = frame_interval;
                 o.distribution = distribution_from(kind, points, kDefaultDrawnJitter);
                 if (!config_json.empty()) {
                     try {
                         o.config = protocol::config_from_json(nlohmann::json::parse(config_json));
                     } catch (const nlohmann::json::exception& e) {
                         throw ConfigError(e.what());
                     }
                     o.config.validate();
                 }
                 return Session(o);
             }),
             py::arg("seed") = 0, py::arg("distribution") = "two_gaussians",
             py::arg("frame_interval") = 1, py::arg("config_json") = "",
             py::arg("points") = py::none())
        .def(
            "handle",
            [](Session& s, const std::string& command_json) {
                return encode_all(s.handle(protocol::decode_command(command_json)));
            },
            py::arg("command_json"), "Apply one JSON command; returns the JSON frames it produced.")
        .def("tick", [](Session& s) { return encode_all(s.tick()); })
        .def("snapshot", [](const Session& s) { return protocol::encode_frame(s.current_snapshot()); })
        .def_property_readonly("mode", [](const Session& s) { return std::string(to_string(s.mode())); })
        .def_property_readonly("epoch", [](const Session& s) { return s.model().epoch; })
        .def("metrics_csv", [](const Session& s) {
            std::ostringstream out;
            write_metrics_csv(out, s.history());
            return out.str();
        });
}
