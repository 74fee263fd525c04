#include "lupi/nn.hpp"

#include <cmath>
#include <string>

#include "lupi/errors.hpp"
#include "lupi/rng.hpp"

namespace lupi {

void ModelSpec::validate() const {
    if (input_dim == 0) throw ConfigError("ModelSpec: input_dim must be positive");
    if (layers.empty()) throw ConfigError("ModelSpec: at least one layer required");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (layers[k].width == 0)
            throw ConfigError("ModelSpec: layer " + std::to_string(k) + " has zero width");
        if (layers[k].activation == Activation::softmax && k + 1 != layers.size())
            throw ConfigError("ModelSpec: softmax is only permitted on the final layer");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("TrainConfig: learning_rate must be finite and non-negative");
}

Model init_model(const ModelSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    Model model;
    model.spec = spec;
    std::size_t fan_in = spec.input_dim;
    for (const LayerSpec& layer : spec.layers) {
        DenseLayer dense;
        dense.weights = Tensor2D(layer.width, fan_in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& w : dense.weights.data()) w = rng.normal() * scale;
        dense.bias.assign(layer.width, 0.0);
        model.layers.push_back(std::move(dense));
        fan_in = layer.width;
    }
    return model;
}

namespace {

void apply_activation(Activation act, Tensor2D& z) {
    switch (act) {
    case Activation::linear:
        break;
    case Activation::relu:
        for (double& v : z.data()) v = v > 0.0 ? v : 0.0;
        break;
    case Activation::sigmoid:
        for (double& v : z.data()) v = logistic(v);
        break;
    case Activation::softmax:
        for (std::size_t i = 0; i < z.rows(); ++i) softmax_inplace(z.row(i));
        break;
    }
}

// d loss / d pre-activation from d loss / d activation, using the cached
// activation values only (relu needs just the sign of a).
Tensor2D activation_backward(Activation act, const Tensor2D& activated, const Tensor2D& grad) {
    switch (act) {
    case Activation::linear:
        return grad;
    case Activation::relu: {
        Tensor2D out = grad;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (activated.data()[i] <= 0.0) out.data()[i] = 0.0;
        return out;
    }
    case Activation::sigmoid: {
        Tensor2D out = grad;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double a = activated.data()[i];
            out.data()[i] *= a * (1.0 - a);
        }
        return out;
    }
    case Activation::softmax: {
        Tensor2D out(grad.rows(), grad.cols());
        for (std::size_t i = 0; i < grad.rows(); ++i) {
            const auto a = activated.row(i);
            const auto g = grad.row(i);
            double dot = 0.0;
            for (std::size_t j = 0; j < a.size(); ++j) dot += g[j] * a[j];
            auto o = out.row(i);
            for (std::size_t j = 0; j < a.size(); ++j) o[j] = a[j] * (g[j] - dot);
        }
        return out;
    }
    }
    throw ConfigError("unknown activation");
}

void check_batch(const Model& model, const Tensor2D& batch) {
    if (batch.cols() != model.spec.input_dim)
        throw ShapeError("forward: batch has " + std::to_string(batch.cols()) +
                         " columns, model expects " + std::to_string(model.spec.input_dim));
}

Tensor2D affine(const DenseLayer& layer, const Tensor2D& input) {
    Tensor2D z = matmul_transpose_b(input, layer.weights);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
    }
    return z;
}

} // namespace

ForwardCache forward_cached(const Model& model, const Tensor2D& batch) {
    check_batch(model, batch);
    ForwardCache cache;
    cache.activations.reserve(model.layers.size() + 1);
    cache.activations.push_back(batch);
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        Tensor2D z = affine(model.layers[k], cache.activations.back());
        apply_activation(model.spec.layers[k].activation, z);
        cache.activations.push_back(std::move(z));
    }
    return cache;
}

Tensor2D forward(const Model& model, const Tensor2D& batch) {
    check_batch(model, batch);
    Tensor2D a = batch;
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        Tensor2D z = affine(model.layers[k], a);
        apply_activation(model.spec.layers[k].activation, z);
        a = std::move(z);
    }
    return a;
}

Tensor2D forward_logits(const Model& model, const Tensor2D& batch) {
    check_batch(model, batch);
    Tensor2D a = batch;
    for (std::size_t k = 0; k + 1 < model.layers.size(); ++k) {
        Tensor2D z = affine(model.layers[k], a);
        apply_activation(model.spec.layers[k].activation, z);
        a = std::move(z);
    }
    return affine(model.layers.back(), a);
}

ParamGrads backward(const Model& model, const ForwardCache& cache, const Tensor2D& loss_grad) {
    const Tensor2D& output = cache.output();
    if (loss_grad.rows() != output.rows() || loss_grad.cols() != output.cols())
        throw ShapeError("backward: loss gradient shape " + std::to_string(loss_grad.rows()) +
                         "x" + std::to_string(loss_grad.cols()) + " does not match output " +
                         std::to_string(output.rows()) + "x" + std::to_string(output.cols()));

    ParamGrads grads;
    grads.layers.resize(model.layers.size());
    Tensor2D upstream = loss_grad;
    for (std::size_t k = model.layers.size(); k-- > 0;) {
        const Tensor2D& activated = cache.activations[k + 1];
        const Tensor2D& input = cache.activations[k];
        Tensor2D dz = activation_backward(model.spec.layers[k].activation, activated, upstream);

        grads.layers[k].weights = matmul_transpose_a(dz, input);
        grads.layers[k].bias.assign(model.layers[k].bias.size(), 0.0);
        for (std::size_t i = 0; i < dz.rows(); ++i) {
            const auto row = dz.row(i);
            for (std::size_t j = 0; j < row.size(); ++j) grads.layers[k].bias[j] += row[j];
        }
        if (k > 0) upstream = matmul(dz, model.layers[k].weights);
    }
    return grads;
}

Model backward_and_step(const Model& model, const ForwardCache& cache, const Tensor2D& loss_grad,
                        const TrainConfig& cfg) {
    cfg.validate();
    ParamGrads grads = backward(model, cache, loss_grad);
    Model updated = model;
    for (std::size_t k = 0; k < updated.layers.size(); ++k) {
        auto& w = updated.layers[k].weights.data();
        const auto& gw = grads.layers[k].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * gw[i];
        auto& b = updated.layers[k].bias;
        const auto& gb = grads.layers[k].bias;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= cfg.learning_rate * gb[i];
    }
    return updated;
}

Model backward_and_step(const Model& model, const Tensor2D& batch, const Tensor2D& loss_grad,
                        const TrainConfig& cfg) {
    return backward_and_step(model, forward_cached(model, batch), loss_grad, cfg);
}

namespace {

double composed_loss_value(const Model& model, const Tensor2D& batch, BaseLossKind kind,
                           const Tensor2D& targets) {
    return batch_base_loss(kind, targets, forward(model, batch)).value;
}

} // namespace

double gradient_check(const Model& model, const Tensor2D& batch, BaseLossKind loss,
                      const Tensor2D& targets) {
    ForwardCache cache = forward_cached(model, batch);
    BatchLossResult base = batch_base_loss(loss, targets, cache.output());
    ParamGrads analytic = backward(model, cache, base.grad);

    const double step = 1e-6;
    double worst = 0.0;
    Model probe = model;
    for (std::size_t k = 0; k < probe.layers.size(); ++k) {
        auto check_param = [&](double& p, double analytic_g) {
            const double saved = p;
            p = saved + step;
            const double up = composed_loss_value(probe, batch, loss, targets);
            p = saved - step;
            const double down = composed_loss_value(probe, batch, loss, targets);
            p = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double denom = std::max(1e-8, std::abs(analytic_g) + std::abs(numeric));
            worst = std::max(worst, std::abs(analytic_g - numeric) / denom);
        };
        auto& w = probe.layers[k].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i)
            check_param(w[i], analytic.layers[k].weights.data()[i]);
        auto& b = probe.layers[k].bias;
        for (std::size_t i = 0; i < b.size(); ++i) check_param(b[i], analytic.layers[k].bias[i]);
    }
    return worst;
}

Model fit(Model model, const Tensor2D& inputs, const TrainConfig& cfg, const BatchLossFn& loss_fn) {
    cfg.validate();
    const std::size_t n = inputs.rows();
    if (n == 0) throw ShapeError("fit: empty training set");

    std::vector<std::size_t> all_rows(n);
    for (std::size_t i = 0; i < n; ++i) all_rows[i] = i;

    Rng shuffle_rng(cfg.seed);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.batch_size == 0 || cfg.batch_size >= n) {
            ForwardCache cache = forward_cached(model, inputs);
            BatchLossResult loss = loss_fn(cache.output(), all_rows);
            model = backward_and_step(model, cache, loss.grad, cfg);
            continue;
        }
        const std::vector<std::size_t> order = shuffle_rng.permutation(n);
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t len = std::min(cfg.batch_size, n - start);
            const std::span<const std::size_t> rows(order.data() + start, len);
            Tensor2D batch = inputs.gather_rows(rows);
            ForwardCache cache = forward_cached(model, batch);
            BatchLossResult loss = loss_fn(cache.output(), rows);
            model = backward_and_step(model, cache, loss.grad, cfg);
        }
    }
    return model;
}

} // namespace lupi
