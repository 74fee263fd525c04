#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lupi/losses.hpp"
#include "lupi/tensor.hpp"

namespace lupi {

enum class Activation { linear, relu, sigmoid, softmax };

struct LayerSpec {
    std::size_t width = 0;
    Activation activation = Activation::linear;
};

struct ModelSpec {
    std::size_t input_dim = 0;
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;

    /// Throws ConfigError on zero widths, empty layer list, or a softmax
    /// anywhere but the final layer.
    void validate() const;
};

struct DenseLayer {
    Tensor2D weights; // width x fan_in
    Vector bias;      // width
};

struct Model {
    ModelSpec spec;
    std::vector<DenseLayer> layers;

    std::size_t output_dim() const { return spec.layers.back().width; }
};

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 500;
    std::size_t batch_size = 0; // 0 = full batch
    std::uint64_t seed = 0;

    /// Rejects negative or non-finite learning rates. A zero learning rate or
    /// zero epochs are accepted and leave parameters unchanged.
    void validate() const;
};

/// Per-layer activations of one forward pass. activations[0] is the input
/// batch, activations[k + 1] the output of layer k.
struct ForwardCache {
    std::vector<Tensor2D> activations;

    const Tensor2D& output() const { return activations.back(); }
};

/// Same shapes as the model parameters.
struct ParamGrads {
    std::vector<DenseLayer> layers;
};

/// Seeded init: weights ~ N(0, 1/fan_in), biases zero. Identical specs
/// (including seed) yield bit-identical models.
Model init_model(const ModelSpec& spec);

Tensor2D forward(const Model& model, const Tensor2D& batch);

ForwardCache forward_cached(const Model& model, const Tensor2D& batch);

/// Pre-activation of the final layer (the logits when the final activation
/// is sigmoid or softmax; identical to forward() for a linear final layer).
Tensor2D forward_logits(const Model& model, const Tensor2D& batch);

/// Chain-rule gradients of a scalar loss through every layer, given d loss /
/// d output. loss_grad must match the cached output shape.
ParamGrads backward(const Model& model, const ForwardCache& cache, const Tensor2D& loss_grad);

/// One gradient-descent step p <- p - learning_rate * dL/dp on every
/// parameter; returns the updated model.
Model backward_and_step(const Model& model, const ForwardCache& cache, const Tensor2D& loss_grad,
                        const TrainConfig& cfg);

/// Convenience overload that recomputes the forward cache for the batch.
Model backward_and_step(const Model& model, const Tensor2D& batch, const Tensor2D& loss_grad,
                        const TrainConfig& cfg);

/// Max over parameters of the relative disagreement between backward() and a
/// central finite difference (step 1e-6) of the composed base loss. Intended
/// for small models; cost is O(#params) forward passes.
double gradient_check(const Model& model, const Tensor2D& batch, BaseLossKind loss,
                      const Tensor2D& targets);

/// Batch loss callback for fit(): receives the forward outputs of the current
/// batch and the dataset row indices the batch was drawn from, returns the
/// loss value and its gradient with respect to the outputs.
using BatchLossFn =
    std::function<BatchLossResult(const Tensor2D& outputs, std::span<const std::size_t> rows)>;

/// Gradient-descent training loop. batch_size 0 trains full-batch in row
/// order; otherwise each epoch visits a seeded permutation of the rows in
/// consecutive chunks. Deterministic given (model.spec.seed, cfg.seed, data).
Model fit(Model model, const Tensor2D& inputs, const TrainConfig& cfg, const BatchLossFn& loss_fn);

} // namespace lupi
