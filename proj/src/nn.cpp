#include "ganlab/nn.hpp"

#include "ganlab/error.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

namespace ganlab::nn {

namespace {

Batch activate(const Batch& pre, Activation a)
{
    switch (a) {
    case Activation::relu:
        return pre.cwiseMax(0.0);
    case Activation::sigmoid:
        return pre.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
    case Activation::linear:
        break;
    }
    return pre;
}

// d(post)/d(pre), elementwise.
Batch activation_slope(const Batch& pre, const Batch& post, Activation a)
{
    switch (a) {
    case Activation::relu:
        return pre.unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; });
    case Activation::sigmoid:
        return post.array() * (1.0 - post.array());
    case Activation::linear:
        break;
    }
    return Batch::Ones(pre.rows(), pre.cols());
}

template <typename Derived>
bool same_bits(const Eigen::DenseBase<Derived>& a, const Eigen::DenseBase<Derived>& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    return std::memcmp(a.derived().data(), b.derived().data(),
                       sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_bits(a[i], b[i])) {
            return false;
        }
    }
    return true;
}

std::string shape_str(Eigen::Index rows, Eigen::Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

} // namespace

std::string_view to_string(Activation a)
{
    switch (a) {
    case Activation::relu:
        return "relu";
    case Activation::sigmoid:
        return "sigmoid";
    case Activation::linear:
        return "linear";
    }
    return "?";
}

std::string_view to_string(OptimizerKind k)
{
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

std::size_t MlpModel::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return n;
}

bool identical_parameters(const MlpModel& a, const MlpModel& b)
{
    return a.layers == b.layers && a.input_offset == b.input_offset &&
           a.input_scale == b.input_scale && same_bits(a.weights, b.weights) &&
           same_bits(a.biases, b.biases);
}

bool identical(const MlpModel& a, const MlpModel& b)
{
    const auto& sa = a.optimizer_state;
    const auto& sb = b.optimizer_state;
    return identical_parameters(a, b) && sa.step_count == sb.step_count &&
           same_bits(sa.m_weights, sb.m_weights) && same_bits(sa.v_weights, sb.v_weights) &&
           same_bits(sa.m_biases, sb.m_biases) && same_bits(sa.v_biases, sb.v_biases);
}

Gradients& Gradients::operator+=(const Gradients& other)
{
    if (other.weights.size() != weights.size()) {
        throw ShapeError("gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

bool Gradients::all_finite() const
{
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            return false;
        }
    }
    return true;
}

void validate_layers(const std::vector<LayerSpec>& layers)
{
    if (layers.empty()) {
        throw ConfigError("network needs at least one layer");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].input_width < 1 || layers[l].output_width < 1) {
            throw ConfigError("layer " + std::to_string(l) + " has a width below 1");
        }
        if (l > 0 && layers[l - 1].output_width != layers[l].input_width) {
            throw ConfigError("layer " + std::to_string(l) + " input width " +
                              std::to_string(layers[l].input_width) +
                              " does not match previous output width " +
                              std::to_string(layers[l - 1].output_width));
        }
    }
}

std::vector<LayerSpec> make_layer_chain(int input_width, const std::vector<int>& hidden,
                                        int output_width, Activation output_activation)
{
    std::vector<LayerSpec> layers;
    int in = input_width;
    for (int width : hidden) {
        layers.push_back({in, width, Activation::relu});
        in = width;
    }
    layers.push_back({in, output_width, output_activation});
    validate_layers(layers);
    return layers;
}

MlpModel mlp_init(const std::vector<LayerSpec>& layers, std::uint64_t seed)
{
    validate_layers(layers);
    std::mt19937_64 rng(seed);
    MlpModel model;
    model.layers = layers;
    for (const auto& layer : layers) {
        const double limit = std::sqrt(6.0 / (layer.input_width + layer.output_width));
        std::uniform_real_distribution<double> uniform(-limit, limit);
        Matrix w(layer.output_width, layer.input_width);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = uniform(rng);
            }
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(layer.output_width));
    }
    return model;
}

ForwardResult forward(const MlpModel& model, const Batch& inputs)
{
    if (inputs.cols() != model.input_width()) {
        throw ShapeError("input width " + std::to_string(inputs.cols()) + " but network expects " +
                         std::to_string(model.input_width()));
    }
    ForwardResult result;
    auto& cache = result.cache;
    cache.inputs = (inputs.array() - model.input_offset) * model.input_scale;
    const Batch* current = &cache.inputs;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Batch pre = (*current) * model.weights[l].transpose();
        pre.rowwise() += model.biases[l].transpose();
        cache.post_activations.push_back(activate(pre, model.layers[l].activation));
        cache.pre_activations.push_back(std::move(pre));
        current = &cache.post_activations.back();
    }
    result.outputs = cache.post_activations.back();
    return result;
}

Batch predict(const MlpModel& model, const Batch& inputs)
{
    return forward(model, inputs).outputs;
}

BackwardResult backward(const MlpModel& model, const ForwardCache& cache,
                        const Batch& output_grads)
{
    const std::size_t depth = model.layers.size();
    const Eigen::Index n = cache.inputs.rows();
    if (cache.pre_activations.size() != depth || cache.post_activations.size() != depth ||
        cache.inputs.cols() != model.input_width()) {
        throw ContractError("forward cache does not belong to this network");
    }
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& pre = cache.pre_activations[l];
        if (pre.rows() != n || pre.cols() != model.layers[l].output_width ||
            cache.post_activations[l].rows() != n ||
            cache.post_activations[l].cols() != pre.cols()) {
            throw ContractError("forward cache layer " + std::to_string(l) +
                                " does not match the network");
        }
    }
    if (output_grads.rows() != n || output_grads.cols() != model.output_width()) {
        throw ShapeError("output gradient shape " +
                         shape_str(output_grads.rows(), output_grads.cols()) + ", expected " +
                         shape_str(n, model.output_width()));
    }
    if (n == 0) {
        throw ContractError("backward on an empty batch");
    }

    BackwardResult result;
    result.params.weights.resize(depth);
    result.params.biases.resize(depth);
    const double inv_n = 1.0 / static_cast<double>(n);

    Batch upstream = output_grads;
    for (std::size_t l = depth; l-- > 0;) {
        const Batch delta =
            upstream.cwiseProduct(activation_slope(cache.pre_activations[l],
                                                   cache.post_activations[l],
                                                   model.layers[l].activation));
        const Batch& layer_in = l == 0 ? cache.inputs : cache.post_activations[l - 1];
        result.params.weights[l] = delta.transpose() * layer_in * inv_n;
        result.params.biases[l] = delta.colwise().sum().transpose() * inv_n;
        upstream = delta * model.weights[l];
    }
    result.inputs = upstream * model.input_scale;
    return result;
}

void reset_optimizer(MlpModel& model)
{
    model.optimizer_state = OptimizerState{};
}

void apply_update(MlpModel& model, const Gradients& grads, const OptimizerSpec& spec)
{
    const std::size_t depth = model.layers.size();
    if (grads.weights.size() != depth || grads.biases.size() != depth) {
        throw ShapeError("gradient layer count does not match the network");
    }
    for (std::size_t l = 0; l < depth; ++l) {
        if (grads.weights[l].rows() != model.weights[l].rows() ||
            grads.weights[l].cols() != model.weights[l].cols() ||
            grads.biases[l].size() != model.biases[l].size()) {
            throw ShapeError("gradient shape mismatch at layer " + std::to_string(l));
        }
    }
    if (!grads.all_finite()) {
        throw NumericalError("non-finite gradient");
    }
    if (!(spec.learning_rate > 0.0) || !std::isfinite(spec.learning_rate)) {
        throw ConfigError("learning rate must be positive");
    }

    auto& state = model.optimizer_state;
    const double lr = spec.learning_rate;
    if (spec.kind == OptimizerKind::sgd) {
        for (std::size_t l = 0; l < depth; ++l) {
            model.weights[l] -= lr * grads.weights[l];
            model.biases[l] -= lr * grads.biases[l];
        }
        ++state.step_count;
        return;
    }

    if (state.m_weights.size() != depth) {
        state.m_weights.clear();
        state.v_weights.clear();
        state.m_biases.clear();
        state.v_biases.clear();
        for (std::size_t l = 0; l < depth; ++l) {
            state.m_weights.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            state.v_weights.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            state.m_biases.push_back(Vector::Zero(model.biases[l].size()));
            state.v_biases.push_back(Vector::Zero(model.biases[l].size()));
        }
    }
    ++state.step_count;
    const double b1 = spec.adam_beta1;
    const double b2 = spec.adam_beta2;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    const double eps = spec.adam_epsilon;

    auto step = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < depth; ++l) {
        step(model.weights[l], state.m_weights[l], state.v_weights[l], grads.weights[l]);
        step(model.biases[l], state.m_biases[l], state.v_biases[l], grads.biases[l]);
    }
}

} // namespace ganlab::nn
