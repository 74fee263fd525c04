#include "lupi/synth.hpp"

#include <algorithm>
#include <string>

#include "lupi/errors.hpp"
#include "lupi/rng.hpp"

namespace lupi {

void SynthConfig::validate() const {
    if (n_train < 1 || n_test < 1)
        throw ConfigError("SynthConfig: n_train and n_test must be >= 1");
    if (d_star < 1 || d < d_star)
        throw ConfigError("SynthConfig: need d >= d_star >= 1");
}

void LupiDataset::validate() const {
    if (X.rows() != X_star.rows() || X.rows() != y.rows())
        throw ShapeError("LupiDataset: X " + std::to_string(X.rows()) + ", X_star " +
                         std::to_string(X_star.rows()) + " and y " + std::to_string(y.rows()) +
                         " rows disagree");
}

namespace {

double target_from_score(TaskKind task, double score) {
    if (task == TaskKind::classification) return score > 0.0 ? 1.0 : 0.0;
    return score;
}

Vector draw_normals(Rng& rng, std::size_t n) {
    Vector v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

// Shared draw order across scenarios: dataset-level parameters first, then
// train rows, then test rows, all from the one seeded stream.
LupiDataset clean_labels_split(const SynthConfig& cfg, Rng& rng, const Vector& alpha,
                               std::size_t n) {
    LupiDataset set;
    set.task = cfg.task;
    set.X = Tensor2D(n, cfg.d);
    set.X_star = Tensor2D(n, 1);
    set.y = Tensor2D(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        auto row = set.X.row(i);
        for (std::size_t j = 0; j < cfg.d; ++j) {
            row[j] = rng.normal();
            score += alpha[j] * row[j];
        }
        const double noise = rng.normal();
        set.X_star(i, 0) = score;
        set.y(i, 0) = target_from_score(cfg.task, score + noise);
    }
    return set;
}

LupiDataset clean_features_split(const SynthConfig& cfg, Rng& rng, const Vector& alpha,
                                 std::size_t n) {
    LupiDataset set;
    set.task = cfg.task;
    set.X = Tensor2D(n, cfg.d);
    set.X_star = Tensor2D(n, cfg.d);
    set.y = Tensor2D(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        double score = 0.0;
        auto clean = set.X_star.row(i);
        auto noisy = set.X.row(i);
        for (std::size_t j = 0; j < cfg.d; ++j) {
            clean[j] = rng.normal();
            score += alpha[j] * clean[j];
        }
        for (std::size_t j = 0; j < cfg.d; ++j) noisy[j] = clean[j] + rng.normal();
        // Targets come from the clean features; the noise is independent of
        // the privileged space.
        set.y(i, 0) = target_from_score(cfg.task, score);
    }
    return set;
}

LupiDataset relevant_features_split(const SynthConfig& cfg, Rng& rng, const Vector& alpha,
                                    const std::vector<std::size_t>& indices, std::size_t n) {
    LupiDataset set;
    set.task = cfg.task;
    set.X = Tensor2D(n, cfg.d);
    set.X_star = Tensor2D(n, cfg.d_star);
    set.y = Tensor2D(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = set.X.row(i);
        for (std::size_t j = 0; j < cfg.d; ++j) row[j] = rng.normal();
        double score = 0.0;
        for (std::size_t j = 0; j < cfg.d_star; ++j) {
            set.X_star(i, j) = row[indices[j]];
            score += alpha[j] * set.X_star(i, j);
        }
        set.y(i, 0) = target_from_score(cfg.task, score);
    }
    return set;
}

LupiDataset sample_dependent_split(const SynthConfig& cfg, Rng& rng, const Vector& alpha,
                                   std::size_t n) {
    LupiDataset set;
    set.task = cfg.task;
    set.X = Tensor2D(n, cfg.d);
    set.X_star = Tensor2D(n, cfg.d_star);
    set.y = Tensor2D(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = set.X.row(i);
        for (std::size_t j = 0; j < cfg.d; ++j) row[j] = rng.normal();
        std::vector<std::size_t> indices = rng.sample_without_replacement(cfg.d, cfg.d_star);
        std::sort(indices.begin(), indices.end());
        double score = 0.0;
        for (std::size_t j = 0; j < cfg.d_star; ++j) {
            set.X_star(i, j) = row[indices[j]];
            score += alpha[j] * set.X_star(i, j);
        }
        set.y(i, 0) = target_from_score(cfg.task, score);
    }
    return set;
}

} // namespace

SplitPair gen_clean_labels(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Vector alpha = draw_normals(rng, cfg.d);
    SplitPair pair;
    pair.train = clean_labels_split(cfg, rng, alpha, cfg.n_train);
    pair.test = clean_labels_split(cfg, rng, alpha, cfg.n_test);
    return pair;
}

SplitPair gen_clean_features(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Vector alpha = draw_normals(rng, cfg.d);
    SplitPair pair;
    pair.train = clean_features_split(cfg, rng, alpha, cfg.n_train);
    pair.test = clean_features_split(cfg, rng, alpha, cfg.n_test);
    return pair;
}

SplitPair gen_relevant_features(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::vector<std::size_t> indices = rng.sample_without_replacement(cfg.d, cfg.d_star);
    std::sort(indices.begin(), indices.end());
    const Vector alpha = draw_normals(rng, cfg.d_star);
    SplitPair pair;
    pair.train = relevant_features_split(cfg, rng, alpha, indices, cfg.n_train);
    pair.test = relevant_features_split(cfg, rng, alpha, indices, cfg.n_test);
    return pair;
}

SplitPair gen_sample_dependent(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const Vector alpha = draw_normals(rng, cfg.d_star);
    SplitPair pair;
    pair.train = sample_dependent_split(cfg, rng, alpha, cfg.n_train);
    pair.test = sample_dependent_split(cfg, rng, alpha, cfg.n_test);
    return pair;
}

SplitPair generate(const SynthConfig& cfg) {
    switch (cfg.scenario) {
    case Scenario::clean_labels: return gen_clean_labels(cfg);
    case Scenario::clean_features: return gen_clean_features(cfg);
    case Scenario::relevant_features: return gen_relevant_features(cfg);
    case Scenario::sample_dependent: return gen_sample_dependent(cfg);
    }
    throw ConfigError("generate: unknown scenario");
}

LupiDataset to_binary_label_regression(LupiDataset classification_set) {
    if (classification_set.task != TaskKind::classification)
        throw DomainError("to_binary_label_regression: expected a classification dataset");
    classification_set.task = TaskKind::regression;
    return classification_set;
}

} // namespace lupi
