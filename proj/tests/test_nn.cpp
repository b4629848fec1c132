#include "ganlab/error.hpp"
#include "ganlab/nn.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace ganlab;
using namespace ganlab::nn;

namespace {

// Random chain of 1..3 layers with widths in 1..8 and random activations.
std::vector<LayerSpec> random_layers(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> depth(1, 3);
    std::uniform_int_distribution<int> width(1, 8);
    std::uniform_int_distribution<int> act(0, 2);
    const int n = depth(rng);
    std::vector<LayerSpec> layers;
    int in = width(rng);
    for (int l = 0; l < n; ++l) {
        const int out = width(rng);
        layers.push_back({in, out, static_cast<Activation>(act(rng))});
        in = out;
    }
    return layers;
}

Batch random_batch(std::mt19937_64& rng, int rows, int cols)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    Batch b(rows, cols);
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        b.data()[i] = normal(rng);
    }
    return b;
}

std::vector<double> flatten(const Gradients& g)
{
    std::vector<double> out;
    for (std::size_t l = 0; l < g.weights.size(); ++l) {
        out.insert(out.end(), g.weights[l].data(), g.weights[l].data() + g.weights[l].size());
        out.insert(out.end(), g.biases[l].data(), g.biases[l].data() + g.biases[l].size());
    }
    return out;
}

} // namespace

TEST_CASE("mlp_init is deterministic and shaped by the layer chain")
{
    const std::vector<LayerSpec> single{{1, 1, Activation::linear}};
    CHECK(identical(mlp_init(single, 7), mlp_init(single, 7)));
    CHECK_FALSE(identical(mlp_init(single, 7), mlp_init(single, 8)));

    const auto m = mlp_init({{2, 3, Activation::relu}, {3, 2, Activation::sigmoid}}, 1);
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0].rows() == 3);
    CHECK(m.weights[0].cols() == 2);
    CHECK(m.weights[1].rows() == 2);
    CHECK(m.weights[1].cols() == 3);
    CHECK(m.biases[0].size() == 3);
    CHECK(m.biases[1].size() == 2);
    CHECK(m.biases[0].isZero(0.0));

    const double limit = std::sqrt(6.0 / 5.0);
    CHECK(m.weights[0].cwiseAbs().maxCoeff() <= limit);

    CHECK_THROWS_AS(mlp_init({{2, 3, Activation::relu}, {2, 2, Activation::linear}}, 1), ConfigError);
    CHECK_THROWS_AS(mlp_init({{0, 3, Activation::relu}}, 1), ConfigError);
    CHECK_THROWS_AS(mlp_init({}, 1), ConfigError);
}

TEST_CASE("forward pass")
{
    SUBCASE("zero parameters through a sigmoid give 0.5")
    {
        auto m = mlp_init({{2, 4, Activation::relu}, {4, 1, Activation::sigmoid}}, 3);
        for (auto& w : m.weights) {
            w.setZero();
        }
        Batch x(3, 2);
        x << 0.1, 0.2, -5, 7, 100, -100;
        const Batch y = predict(m, x);
        for (Eigen::Index i = 0; i < y.rows(); ++i) {
            CHECK(y(i, 0) == 0.5);
        }
    }
    SUBCASE("single affine layer")
    {
        auto m = mlp_init({{2, 2, Activation::linear}}, 0);
        m.weights[0] << 2, 0, 0, 3;
        Batch x(1, 2);
        x << 1, 1;
        const Batch y = predict(m, x);
        CHECK(y(0, 0) == 2.0);
        CHECK(y(0, 1) == 3.0);
    }
    SUBCASE("batch of 64 through two layers")
    {
        const auto m = mlp_init({{2, 8, Activation::relu}, {8, 2, Activation::sigmoid}}, 11);
        std::mt19937_64 rng(5);
        const auto r = forward(m, random_batch(rng, 64, 2));
        CHECK(r.outputs.rows() == 64);
        CHECK(r.outputs.allFinite());
        CHECK(r.cache.post_activations.size() == 2);
        CHECK(r.cache.pre_activations.size() == 2);
    }
    SUBCASE("width mismatch")
    {
        const auto m = mlp_init({{2, 2, Activation::linear}}, 0);
        CHECK_THROWS_AS(forward(m, Batch::Zero(4, 3)), ShapeError);
    }
    SUBCASE("matches a scalar reference evaluation")
    {
        std::mt19937_64 rng(99);
        for (int trial = 0; trial < 10; ++trial) {
            const auto layers = random_layers(rng);
            const auto m = mlp_init(layers, trial);
            const Batch x = random_batch(rng, 5, layers.front().input_width);
            const Batch y = predict(m, x);
            for (int i = 0; i < 5; ++i) {
                std::vector<double> xi(x.cols());
                for (Eigen::Index c = 0; c < x.cols(); ++c) {
                    xi[c] = x(i, c);
                }
                const auto ref = oracle::naive_forward(m, xi);
                for (std::size_t k = 0; k < ref.size(); ++k) {
                    CHECK(y(i, k) == doctest::Approx(ref[k]).epsilon(1e-12));
                }
            }
        }
    }
}

TEST_CASE("sigmoid outputs stay strictly inside (0,1)")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto layers = random_layers(rng);
        layers.back().activation = Activation::sigmoid;
        const auto m = mlp_init(layers, trial);
        const Batch y = predict(m, random_batch(rng, 32, layers.front().input_width));
        CHECK((y.array() > 0.0).all());
        CHECK((y.array() < 1.0).all());
    }
}

TEST_CASE("backward on a 1x1 linear layer is the chain rule")
{
    auto m = mlp_init({{1, 1, Activation::linear}}, 0);
    m.weights[0](0, 0) = 1.7;
    Batch x(1, 1);
    x << 0.3;
    const auto f = forward(m, x);
    const auto g = backward(m, f.cache, Batch::Ones(1, 1));
    CHECK(g.params.weights[0](0, 0) == doctest::Approx(0.3));
    CHECK(g.params.biases[0](0) == doctest::Approx(1.0));
    CHECK(g.inputs(0, 0) == doctest::Approx(1.7));
}

TEST_CASE("zero output gradients give zero gradients")
{
    const auto m = mlp_init({{2, 5, Activation::relu}, {5, 3, Activation::sigmoid}}, 4);
    std::mt19937_64 rng(1);
    const auto f = forward(m, random_batch(rng, 7, 2));
    const auto g = backward(m, f.cache, Batch::Zero(7, 3));
    for (double v : flatten(g.params)) {
        CHECK(v == 0.0);
    }
    CHECK(g.inputs.isZero(0.0));
}

TEST_CASE("backward rejects a cache from another network")
{
    const auto a = mlp_init({{2, 5, Activation::relu}, {5, 1, Activation::sigmoid}}, 4);
    const auto b = mlp_init({{2, 3, Activation::relu}, {3, 1, Activation::sigmoid}}, 4);
    const auto f = forward(a, Batch::Zero(4, 2));
    CHECK_THROWS_AS(backward(b, f.cache, Batch::Zero(4, 1)), ContractError);
    CHECK_THROWS_AS(backward(a, f.cache, Batch::Zero(3, 1)), ShapeError);
}

// Loss: L = mean_i sum_k (c_k * y_ik + 0.5 * d_k * y_ik^2). The finite
// differences evaluate L with the scalar reference forward pass.
TEST_CASE("analytic gradients match central finite differences")
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    double worst_param = 0.0;
    double worst_input = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const auto layers = random_layers(rng);
        auto model = mlp_init(layers, 1000 + trial);
        for (auto& b : model.biases) {
            for (Eigen::Index k = 0; k < b.size(); ++k) {
                b(k) = 0.1 * coef(rng);
            }
        }
        const int out_w = layers.back().output_width;
        std::vector<double> c(out_w), d(out_w);
        for (int k = 0; k < out_w; ++k) {
            c[k] = coef(rng);
            d[k] = coef(rng);
        }
        const int n = 6;
        // Central differences are meaningless across a ReLU kink; redraw the
        // inputs until every ReLU pre-activation is clear of zero.
        auto min_relu = [&](const Batch& in) {
            const auto probe = forward(model, in);
            double m = 1e300;
            for (std::size_t l = 0; l < layers.size(); ++l) {
                if (layers[l].activation == Activation::relu) {
                    m = std::min(m, probe.cache.pre_activations[l].cwiseAbs().minCoeff());
                }
            }
            return m;
        };
        Batch x = random_batch(rng, n, layers.front().input_width);
        while (min_relu(x) < 1e-3) {
            x = random_batch(rng, n, layers.front().input_width);
        }

        auto example_loss = [&](const std::vector<double>& y) {
            double s = 0.0;
            for (int k = 0; k < out_w; ++k) {
                s += c[k] * y[k] + 0.5 * d[k] * y[k] * y[k];
            }
            return s;
        };
        auto row = [&](const Batch& b, int i) {
            std::vector<double> v(b.cols());
            for (Eigen::Index k = 0; k < b.cols(); ++k) {
                v[k] = b(i, k);
            }
            return v;
        };
        auto total_loss = [&] {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                s += example_loss(oracle::naive_forward(model, row(x, i)));
            }
            return s / n;
        };

        const auto f = forward(model, x);
        Batch out_grads(n, out_w);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < out_w; ++k) {
                out_grads(i, k) = c[k] + d[k] * f.outputs(i, k);
            }
        }
        const auto g = backward(model, f.cache, out_grads);

        const auto numeric = oracle::central_difference(oracle::parameter_pointers(model), total_loss);
        const double param_err = oracle::relative_error(flatten(g.params), numeric);
        worst_param = std::max(worst_param, param_err);
        CHECK_MESSAGE(param_err < 1e-4, "trial " << trial);

        for (int i = 0; i < n; ++i) {
            std::vector<double> xi = row(x, i);
            std::vector<double*> ptrs;
            for (auto& v : xi) {
                ptrs.push_back(&v);
            }
            const auto numeric_in = oracle::central_difference(
                ptrs, [&] { return example_loss(oracle::naive_forward(model, xi)); });
            const double in_err = oracle::relative_error(row(g.inputs, i), numeric_in);
            worst_input = std::max(worst_input, in_err);
            CHECK_MESSAGE(in_err < 1e-4, "trial " << trial << " example " << i);
        }
    }
    MESSAGE("worst relative error: params " << worst_param << ", inputs " << worst_input);
}

TEST_CASE("optimizer updates")
{
    auto scalar_model = [] {
        auto m = mlp_init({{1, 1, Activation::linear}}, 0);
        m.weights[0](0, 0) = 1.0;
        return m;
    };
    auto scalar_grad = [](double g) {
        Gradients grads;
        grads.weights.push_back(Matrix::Constant(1, 1, g));
        grads.biases.push_back(Vector::Zero(1));
        return grads;
    };

    SUBCASE("one SGD step")
    {
        auto m = scalar_model();
        apply_update(m, scalar_grad(2.0), {OptimizerKind::sgd, 0.1});
        CHECK(m.weights[0](0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    }
    SUBCASE("zero gradient is a fixed point of SGD")
    {
        auto m = scalar_model();
        const auto before = m;
        apply_update(m, scalar_grad(0.0), {OptimizerKind::sgd, 0.1});
        CHECK(identical_parameters(m, before));
    }
    SUBCASE("first Adam step moves by the learning rate")
    {
        // m = 0.1, v = 0.001; bias-corrected both equal 1, so the step is
        // lr / (1 + eps).
        auto m = scalar_model();
        apply_update(m, scalar_grad(1.0), {OptimizerKind::adam, 0.001});
        const double expected = 1.0 - 0.001 / (1.0 + 1e-8);
        CHECK(m.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(m.optimizer_state.step_count == 1);
        CHECK(m.optimizer_state.m_weights[0](0, 0) == doctest::Approx(0.1));
        CHECK(m.optimizer_state.v_weights[0](0, 0) == doctest::Approx(0.001));
    }
    SUBCASE("second Adam step with a constant gradient")
    {
        // m2 = 0.19, v2 = 0.001999; corrections 0.19 and 0.001999 -> step lr.
        auto m = scalar_model();
        apply_update(m, scalar_grad(1.0), {OptimizerKind::adam, 0.001});
        apply_update(m, scalar_grad(1.0), {OptimizerKind::adam, 0.001});
        const double expected = 1.0 - 2.0 * 0.001 / (1.0 + 1e-8);
        CHECK(m.weights[0](0, 0) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("non-finite gradients are rejected without touching the model")
    {
        auto m = scalar_model();
        apply_update(m, scalar_grad(1.0), {OptimizerKind::adam, 0.001});
        const auto before = m;
        CHECK_THROWS_AS(apply_update(m, scalar_grad(std::numeric_limits<double>::quiet_NaN()),
                                     {OptimizerKind::adam, 0.001}),
                        NumericalError);
        CHECK_THROWS_AS(apply_update(m, scalar_grad(std::numeric_limits<double>::infinity()),
                                     {OptimizerKind::sgd, 0.1}),
                        NumericalError);
        CHECK(identical(m, before));
    }
    SUBCASE("shape mismatch")
    {
        auto m = mlp_init({{2, 2, Activation::linear}}, 0);
        CHECK_THROWS_AS(apply_update(m, scalar_grad(1.0), {}), ShapeError);
    }
}

TEST_CASE("updates preserve shapes and are deterministic")
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto layers = random_layers(rng);
        const Batch x = random_batch(rng, 8, layers.front().input_width);
        auto run = [&](OptimizerKind kind) {
            auto m = mlp_init(layers, trial);
            for (int s = 0; s < 5; ++s) {
                const auto f = forward(m, x);
                const auto g = backward(m, f.cache, f.outputs);
                apply_update(m, g.params, {kind, 0.01});
            }
            return m;
        };
        for (auto kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
            const auto a = run(kind);
            const auto b = run(kind);
            CHECK(identical(a, b));
            for (std::size_t l = 0; l < layers.size(); ++l) {
                CHECK(a.weights[l].rows() == layers[l].output_width);
                CHECK(a.weights[l].cols() == layers[l].input_width);
                CHECK(a.biases[l].size() == layers[l].output_width);
            }
        }
    }
}
