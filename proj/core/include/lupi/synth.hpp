#pragma once

#include <cstdint>

#include "lupi/tensor.hpp"

namespace lupi {

enum class TaskKind { classification, regression };

enum class Scenario { clean_labels, clean_features, relevant_features, sample_dependent };

struct SynthConfig {
    Scenario scenario = Scenario::clean_labels;
    TaskKind task = TaskKind::classification;
    std::size_t n_train = 200;
    std::size_t n_test = 1000;
    std::size_t d = 50;      // input space dimensionality
    std::size_t d_star = 3;  // privileged dimensionality in the relevant-feature scenarios
    std::uint64_t seed = 0;

    void validate() const;
};

/// Parallel (input, privileged, target) arrays. Targets are N x 1 for binary
/// and regression tasks, N x K one-hot for multiclass.
struct LupiDataset {
    Tensor2D X;      // N x d_input
    Tensor2D X_star; // N x d_priv
    Tensor2D y;      // N x out_dim
    TaskKind task = TaskKind::classification;

    std::size_t rows() const { return X.rows(); }

    /// Throws ShapeError when the parallel arrays disagree on row count.
    void validate() const;
};

struct SplitPair {
    LupiDataset train;
    LupiDataset test;
};

/// x ~ N(0, I_d), x* = alpha' x (one column), eps ~ N(0, 1).
/// Classification: y = 1(x* + eps > 0); regression: y = x* + eps.
/// alpha is drawn once and shared by both splits.
SplitPair gen_clean_labels(const SynthConfig& cfg);

/// x* ~ N(0, I_d), x = x* + eps with eps ~ N(0, I_d). Targets come from the
/// clean features: y = 1(alpha' x* > 0) / alpha' x*.
SplitPair gen_clean_features(const SynthConfig& cfg);

/// One index set J (|J| = d_star, sorted) shared by all examples; x* = x_J,
/// y from alpha' x*.
SplitPair gen_relevant_features(const SynthConfig& cfg);

/// A fresh index set J_i per example; x*_i = x_{i,J_i}, y from alpha' x*_i.
SplitPair gen_sample_dependent(const SynthConfig& cfg);

/// Dispatch on cfg.scenario.
SplitPair generate(const SynthConfig& cfg);

/// Reinterpret a binary classification set as a regression problem over its
/// 0/1 labels (the "regression over binary labels" setting).
LupiDataset to_binary_label_regression(LupiDataset classification_set);

} // namespace lupi
