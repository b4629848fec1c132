#pragma once

// Minimal dense network engine: forward pass with activation caching, exact
// reverse-mode gradients, SGD and Adam updates.
//
// Batches are row-major in the sense that each row of a Batch is one example.

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace ganlab::nn {

using Batch = Eigen::MatrixXd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { relu, sigmoid, linear };

std::string_view to_string(Activation a);

struct LayerSpec {
    int input_width = 1;
    int output_width = 1;
    Activation activation = Activation::linear;

    bool operator==(const LayerSpec&) const = default;
};

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    bool operator==(const OptimizerSpec&) const = default;
};

// Moment accumulators. Empty until the first Adam step; cleared whenever the
// optimizer kind changes.
struct OptimizerState {
    std::int64_t step_count = 0;
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Vector> m_biases, v_biases;
};

struct MlpModel {
    std::vector<LayerSpec> layers;
    // Fixed, untrained input map applied before the first layer:
    // x -> (x - input_offset) * input_scale.
    double input_offset = 0.0;
    double input_scale = 1.0;
    std::vector<Matrix> weights; // output_width x input_width
    std::vector<Vector> biases;  // output_width
    OptimizerState optimizer_state;

    int input_width() const { return layers.front().input_width; }
    int output_width() const { return layers.back().output_width; }
    std::size_t parameter_count() const;
};

// Bitwise comparison of shapes, parameters and optimizer state.
bool identical(const MlpModel& a, const MlpModel& b);
bool identical_parameters(const MlpModel& a, const MlpModel& b);

struct ForwardCache {
    Batch inputs; // after the input map
    std::vector<Batch> pre_activations;
    std::vector<Batch> post_activations;
};

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    // Elementwise sum, used to combine the real and fake halves of a
    // discriminator update.
    Gradients& operator+=(const Gradients& other);
    bool all_finite() const;
};

struct ForwardResult {
    Batch outputs;
    ForwardCache cache;
};

struct BackwardResult {
    Gradients params; // averaged over the batch
    Batch inputs;     // per example, not averaged, w.r.t. the raw inputs
};

// Throws ConfigError unless widths are >= 1 and the chain is consistent.
void validate_layers(const std::vector<LayerSpec>& layers);

// Builds a chain input -> hidden... -> output with ReLU hidden layers.
std::vector<LayerSpec> make_layer_chain(int input_width, const std::vector<int>& hidden,
                                        int output_width, Activation output_activation);

// Xavier-uniform weights, zero biases.
MlpModel mlp_init(const std::vector<LayerSpec>& layers, std::uint64_t seed);

ForwardResult forward(const MlpModel& model, const Batch& inputs);

// Outputs only; no cache kept.
Batch predict(const MlpModel& model, const Batch& inputs);

// output_grads holds d(loss_i)/d(output_i) for each example i. Parameter
// gradients are the batch mean of the per-example gradients.
BackwardResult backward(const MlpModel& model, const ForwardCache& cache,
                        const Batch& output_grads);

// One optimizer step. Throws NumericalError (model untouched) on non-finite
// gradients. The step counter in model.optimizer_state drives Adam's bias
// correction.
void apply_update(MlpModel& model, const Gradients& grads, const OptimizerSpec& spec);

// Resets moments and the step counter.
void reset_optimizer(MlpModel& model);

} // namespace ganlab::nn
