#pragma once

#include <cstddef>
#include <optional>

#include "lupi/tensor.hpp"

namespace lupi {

/// Fraction of positions where the two label vectors match exactly.
double accuracy(const Vector& labels, const Vector& predicted_labels);

double rmse(const Vector& targets, const Vector& predictions);

/// Pearson correlation of tie-averaged (fractional) ranks. Throws
/// UndefinedMetricError when either side is constant.
double spearman(const Vector& a, const Vector& b);

/// Mann-Whitney AUC: probability a random positive outscores a random
/// negative, ties counting one half. Labels must contain both classes.
double auc_roc(const Vector& labels, const Vector& scores);

/// Average precision: mean of ranked-prefix precisions at each positive,
/// under a stable descending sort of the scores. Needs at least one positive.
double auc_pr(const Vector& labels, const Vector& scores);

struct Aggregate {
    double mean = 0.0;
    double std_dev = 0.0; // population std (divide by n)
    std::size_t n_runs = 0;
};

Aggregate aggregate(const Vector& values);

struct MetricReport {
    std::optional<double> accuracy;
    std::optional<double> rmse;
    std::optional<double> spearman;
    std::optional<double> auc_roc;
    std::optional<double> auc_pr;
};

} // namespace lupi
