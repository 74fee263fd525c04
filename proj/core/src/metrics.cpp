#include "lupi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lupi/errors.hpp"

namespace lupi {

namespace {

void check_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

// Fractional ranks, ties averaged, 1-based.
Vector fractional_ranks(const Vector& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    Vector ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
        i = j + 1;
    }
    return ranks;
}

double pearson(const Vector& a, const Vector& b) {
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw UndefinedMetricError("spearman: constant vector has no rank correlation");
    return cov / std::sqrt(var_a * var_b);
}

void check_binary_labels(const Vector& labels, const char* what) {
    for (double l : labels)
        if (l != 0.0 && l != 1.0)
            throw DomainError(std::string(what) + ": labels must be 0 or 1");
}

} // namespace

double accuracy(const Vector& labels, const Vector& predicted_labels) {
    check_same_length(labels.size(), predicted_labels.size(), "accuracy");
    if (labels.empty()) throw ShapeError("accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == predicted_labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double rmse(const Vector& targets, const Vector& predictions) {
    check_same_length(targets.size(), predictions.size(), "rmse");
    if (targets.empty()) throw ShapeError("rmse: empty input");
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double diff = predictions[i] - targets[i];
        total += diff * diff;
    }
    return std::sqrt(total / static_cast<double>(targets.size()));
}

double spearman(const Vector& a, const Vector& b) {
    check_same_length(a.size(), b.size(), "spearman");
    if (a.size() < 2) throw ShapeError("spearman: need at least 2 observations");
    return pearson(fractional_ranks(a), fractional_ranks(b));
}

double auc_roc(const Vector& labels, const Vector& scores) {
    check_same_length(labels.size(), scores.size(), "auc_roc");
    check_binary_labels(labels, "auc_roc");
    double positives = 0.0;
    for (double l : labels) positives += l;
    const double negatives = static_cast<double>(labels.size()) - positives;
    if (positives == 0.0 || negatives == 0.0)
        throw UndefinedMetricError("auc_roc: needs at least one positive and one negative");

    // Mann-Whitney via rank sums; fractional ranks give ties weight 1/2.
    const Vector ranks = fractional_ranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == 1.0) rank_sum += ranks[i];
    return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double auc_pr(const Vector& labels, const Vector& scores) {
    check_same_length(labels.size(), scores.size(), "auc_pr");
    check_binary_labels(labels, "auc_pr");
    std::size_t positives = 0;
    for (double l : labels)
        if (l == 1.0) ++positives;
    if (positives == 0) throw UndefinedMetricError("auc_pr: needs at least one positive");

    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] == 1.0) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return ap / static_cast<double>(positives);
}

Aggregate aggregate(const Vector& values) {
    if (values.empty()) throw DomainError("aggregate: empty value list");
    Aggregate agg;
    agg.n_runs = values.size();
    const double n = static_cast<double>(values.size());
    for (double v : values) agg.mean += v;
    agg.mean /= n;
    double var = 0.0;
    for (double v : values) {
        const double d = v - agg.mean;
        var += d * d;
    }
    agg.std_dev = std::sqrt(var / n);
    return agg;
}

} // namespace lupi
