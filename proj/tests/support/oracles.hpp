#pragma once

// Independent test oracles. Everything here recomputes expected values from
// first principles (finite differences, pairwise enumeration, explicit curve
// integration, normal equations) without touching the implementation paths it
// checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "lupi/nn.hpp"
#include "lupi/tensor.hpp"

namespace oracles {

inline double rel_err(double analytic, double numeric) {
    const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    return std::abs(analytic - numeric) / denom;
}

// Max relative disagreement between a loss's analytic gradient and central
// finite differences over the tensor it differentiates (student outputs or
// logits).
inline double loss_input_fd_error(
    const std::function<lupi::BatchLossResult(const lupi::Tensor2D&)>& loss,
    lupi::Tensor2D at, double step = 1e-6) {
    const lupi::BatchLossResult base = loss(at);
    double worst = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double saved = at.data()[i];
        at.data()[i] = saved + step;
        const double up = loss(at).value;
        at.data()[i] = saved - step;
        const double down = loss(at).value;
        at.data()[i] = saved;
        worst = std::max(worst, rel_err(base.grad.data()[i], (up - down) / (2.0 * step)));
    }
    return worst;
}

// Max relative disagreement between backpropagated parameter gradients and
// central finite differences of the composed scalar loss(model outputs).
inline double param_fd_error(
    const lupi::Model& model, const lupi::Tensor2D& batch,
    const std::function<lupi::BatchLossResult(const lupi::Tensor2D&)>& loss,
    double step = 1e-6) {
    const lupi::ForwardCache cache = lupi::forward_cached(model, batch);
    const lupi::BatchLossResult at = loss(cache.output());
    const lupi::ParamGrads grads = lupi::backward(model, cache, at.grad);

    lupi::Model probe = model;
    double worst = 0.0;
    auto value_at = [&]() { return loss(lupi::forward(probe, batch)).value; };
    auto check = [&](double& p, double analytic) {
        const double saved = p;
        p = saved + step;
        const double up = value_at();
        p = saved - step;
        const double down = value_at();
        p = saved;
        worst = std::max(worst, rel_err(analytic, (up - down) / (2.0 * step)));
    };
    for (std::size_t k = 0; k < probe.layers.size(); ++k) {
        auto& w = probe.layers[k].weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) check(w[i], grads.layers[k].weights.data()[i]);
        auto& b = probe.layers[k].bias;
        for (std::size_t i = 0; i < b.size(); ++i) check(b[i], grads.layers[k].bias[i]);
    }
    return worst;
}

// AUC-ROC by enumerating every positive/negative pair, ties worth one half.
inline double auc_roc_pairwise(const lupi::Vector& labels, const lupi::Vector& scores) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (labels[j] != 0.0) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

// Trapezoidal area under the explicitly enumerated ROC curve, one point per
// distinct score threshold.
inline double auc_roc_trapezoid(const lupi::Vector& labels, const lupi::Vector& scores) {
    lupi::Vector thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    double positives = 0.0;
    for (double l : labels) positives += l;
    const double negatives = static_cast<double>(labels.size()) - positives;

    double area = 0.0, prev_tpr = 0.0, prev_fpr = 0.0;
    for (double th : thresholds) {
        double tp = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (scores[i] >= th) (labels[i] == 1.0 ? tp : fp) += 1.0;
        }
        const double tpr = tp / positives;
        const double fpr = fp / negatives;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    area += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
    return area;
}

// Average precision by walking the stably score-sorted list.
inline double average_precision_enumerated(const lupi::Vector& labels,
                                           const lupi::Vector& scores) {
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    double positives = 0.0, hits = 0.0, ap = 0.0;
    for (double l : labels) positives += l;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        if (labels[order[rank]] == 1.0) {
            hits += 1.0;
            ap += hits / static_cast<double>(rank + 1);
        }
    }
    return ap / positives;
}

// Least squares through the normal equations (A'A)x = A'b, solved by Gaussian
// elimination with partial pivoting.
inline lupi::Vector least_squares(const lupi::Tensor2D& a, const lupi::Vector& b) {
    const std::size_t n = a.cols();
    std::vector<lupi::Vector> m(n, lupi::Vector(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * a(r, j);
            m[i][j] = s;
        }
        double s = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b[r];
        m[i][n] = s;
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        std::swap(m[col], m[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col] == 0.0) continue;
            const double f = m[r][col] / m[col][col];
            for (std::size_t c = col; c <= n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    lupi::Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
    return x;
}

} // namespace oracles
