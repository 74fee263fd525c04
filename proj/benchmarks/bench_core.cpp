#include <benchmark/benchmark.h>

#include "lupi/losses.hpp"
#include "lupi/metrics.hpp"
#include "lupi/nn.hpp"
#include "lupi/rng.hpp"
#include "lupi/synth.hpp"

using namespace lupi;

namespace {

Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, cols);
    for (double& v : t.data()) v = rng.normal();
    return t;
}

Model mlp(std::size_t input_dim, std::size_t hidden, std::size_t out) {
    ModelSpec spec;
    spec.input_dim = input_dim;
    spec.layers = {{hidden, Activation::relu}, {out, Activation::softmax}};
    spec.seed = 1;
    return init_model(spec);
}

} // namespace

static void ForwardMnistShape(benchmark::State& state) {
    const Model model = mlp(784, 16, 10);
    const Tensor2D batch = random_tensor(state.range(0), 784, 2);
    for (auto _ : state) {
        Tensor2D out = forward(model, batch);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(ForwardMnistShape)->Arg(64)->Arg(500)->Arg(10000);

static void TrainStepSynthetic(benchmark::State& state) {
    Model model = mlp(50, 8, 1);
    model.spec.layers.back().activation = Activation::sigmoid;
    const Tensor2D batch = random_tensor(200, 50, 3);
    Tensor2D targets(200, 1);
    for (std::size_t i = 0; i < 200; ++i) targets(i, 0) = i % 2;
    TrainConfig cfg;
    cfg.learning_rate = 0.01;
    for (auto _ : state) {
        ForwardCache cache = forward_cached(model, batch);
        BatchLossResult loss = batch_base_loss(BaseLossKind::bce, targets, cache.output());
        model = backward_and_step(model, cache, loss.grad, cfg);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(TrainStepSynthetic);

static void MetaLossEq2(benchmark::State& state) {
    const std::size_t n = state.range(0);
    const Tensor2D student = random_tensor(n, 10, 4);
    const Tensor2D teacher = random_tensor(n, 10, 5);
    Tensor2D targets(n, 10);
    for (std::size_t i = 0; i < n; ++i) targets(i, i % 10) = 1.0;
    MetaLossConfig cfg;
    cfg.temperature_T = 1.0;
    cfg.base_loss = BaseLossKind::mse;
    for (auto _ : state) {
        BatchLossResult loss = meta_loss(cfg, student, teacher, targets);
        benchmark::DoNotOptimize(loss);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(MetaLossEq2)->Arg(200)->Arg(10000);

static void GenerateCleanLabels(benchmark::State& state) {
    SynthConfig cfg;
    cfg.scenario = Scenario::clean_labels;
    cfg.task = TaskKind::regression;
    cfg.n_train = 200;
    cfg.n_test = 1000;
    for (auto _ : state) {
        cfg.seed++;
        SplitPair pair = generate(cfg);
        benchmark::DoNotOptimize(pair);
    }
}
BENCHMARK(GenerateCleanLabels);

static void AucRoc(benchmark::State& state) {
    const std::size_t n = state.range(0);
    Rng rng(6);
    Vector labels(n), scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
        scores[i] = rng.normal();
    }
    labels[0] = 0.0;
    labels[1] = 1.0;
    for (auto _ : state) {
        double auc = auc_roc(labels, scores);
        benchmark::DoNotOptimize(auc);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(AucRoc)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
