#include "ganlab/snapshot.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace ganlab {

namespace {

bool finite(const Point2& p)
{
    return std::isfinite(p[0]) && std::isfinite(p[1]);
}

bool open_unit(double v)
{
    return v > 0.0 && v < 1.0;
}

void check_density(const DensityGrid& g, const char* name, std::vector<std::string>& out)
{
    const auto cells = static_cast<std::size_t>(g.resolution) * g.resolution;
    if (g.resolution < 1 || g.mass.size() != cells) {
        out.push_back(std::string(name) + ": size does not match resolution");
        return;
    }
    double total = 0.0;
    for (double m : g.mass) {
        if (!(m >= 0.0)) {
            out.push_back(std::string(name) + ": negative mass");
            return;
        }
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        out.push_back(std::string(name) + ": mass does not sum to 1");
    }
}

} // namespace

std::vector<std::string> snapshot_violations(const TrainingSnapshot& s)
{
    std::vector<std::string> out;

    if (s.real_scores.size() != s.real_samples.size()) {
        out.emplace_back("real_scores length differs from real_samples");
    }
    if (s.fake_scores.size() != s.fake_samples.size()) {
        out.emplace_back("fake_scores length differs from fake_samples");
    }
    if (!s.fake_sample_movements.empty() &&
        s.fake_sample_movements.size() != s.fake_samples.size()) {
        out.emplace_back("fake_sample_movements length differs from fake_samples");
    }
    for (const auto* scores : {&s.real_scores, &s.fake_scores}) {
        for (double v : *scores) {
            if (!open_unit(v)) {
                out.emplace_back("sample score outside (0,1)");
                break;
            }
        }
    }
    for (const auto* points : {&s.real_samples, &s.fake_samples}) {
        for (const auto& p : *points) {
            if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0)) {
                out.emplace_back("sample outside the unit square");
                break;
            }
        }
    }
    for (const auto& m : s.fake_sample_movements) {
        if (!finite(m)) {
            out.emplace_back("non-finite movement vector");
            break;
        }
    }

    const auto& mf = s.manifold;
    const int side = mf.resolution + 1;
    const std::size_t corners =
        mf.noise_dim == 2 ? static_cast<std::size_t>(side) * side : static_cast<std::size_t>(side);
    const auto cells = static_cast<std::size_t>(mf.cell_count());
    if (mf.resolution < 2 || (mf.noise_dim != 1 && mf.noise_dim != 2) ||
        mf.corners.size() != corners || mf.cell_density.size() != cells ||
        mf.cell_mass.size() != cells || mf.cell_flags.size() != cells) {
        out.emplace_back("manifold: sizes do not match resolution");
    } else {
        for (const auto& c : mf.corners) {
            if (!finite(c)) {
                out.emplace_back("manifold: non-finite corner");
                break;
            }
        }
        for (std::size_t i = 0; i < cells; ++i) {
            if (!(mf.cell_density[i] >= 0.0) || !(mf.cell_mass[i] >= 0.0)) {
                out.emplace_back("manifold: negative density");
                break;
            }
        }
    }

    const auto& hm = s.heatmap;
    if (hm.resolution < 1 ||
        hm.scores.size() != static_cast<std::size_t>(hm.resolution) * hm.resolution) {
        out.emplace_back("heatmap: size does not match resolution");
    } else {
        for (double v : hm.scores) {
            if (!open_unit(v)) {
                out.emplace_back("heatmap: score outside (0,1)");
                break;
            }
        }
    }

    check_density(s.real_density, "real_density", out);
    check_density(s.fake_density, "fake_density", out);

    if (!(s.metrics.js >= 0.0 && s.metrics.js <= std::numbers::ln2 + 1e-9)) {
        out.emplace_back("metrics: js outside [0, ln 2]");
    }
    if (!(s.metrics.kl >= -1e-9)) {
        out.emplace_back("metrics: negative kl");
    }
    if (s.metrics.epoch != s.epoch) {
        out.emplace_back("metrics epoch differs from snapshot epoch");
    }
    if (s.slow_phase.has_value() != (s.mode == "slow_motion")) {
        out.emplace_back("slow_phase must be present exactly in slow-motion frames");
    }
    return out;
}

} // namespace ganlab
