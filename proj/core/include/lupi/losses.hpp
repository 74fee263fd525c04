#pragma once

#include <optional>
#include <span>

#include "lupi/tensor.hpp"

namespace lupi {

enum class BaseLossKind { mse, bce, cross_entropy };

/// Probabilities fed to log losses are clamped to [kProbClamp, 1 - kProbClamp]
/// so every loss value stays finite on finite inputs.
inline constexpr double kProbClamp = 1e-12;

struct LossResult {
    double value = 0.0;
    Vector grad; // d value / d prediction
};

struct BatchLossResult {
    double value = 0.0;
    Tensor2D grad; // d value / d predictions, same shape as the prediction tensor
};

/// Loss of a single prediction vector against a target vector.
/// mse and bce average over entries; cross_entropy treats the pair as one
/// distribution: -sum_k target_k * log(pred_k).
LossResult base_loss(BaseLossKind kind, const Vector& target, const Vector& prediction);

/// Mean over rows of the per-example loss; gradient carries the 1/N factor.
BatchLossResult batch_base_loss(BaseLossKind kind, const Tensor2D& targets,
                                const Tensor2D& predictions);

/// Loss of one example. mse/bce average over the output dims, cross_entropy
/// sums -target*log(pred) over classes.
double per_example_loss(BaseLossKind kind, std::span<const double> target,
                        std::span<const double> prediction);

/// Knowledge-transfer weight exp(-T * teacher_loss), in (0, 1].
double transfer_weight(double temperature, double teacher_loss);

struct MetaLossConfig {
    double temperature_T = 0.0;
    std::optional<Vector> per_example_T; // length N, overrides temperature_T pointwise
    BaseLossKind base_loss = BaseLossKind::mse;

    void validate() const;
};

struct DistillConfig {
    double lambda = 0.5;       // in [0, 1]
    double temperature_T = 1.0; // > 0
    BaseLossKind base_loss = BaseLossKind::bce; // bce or cross_entropy

    void validate() const;
};

/// Generalized meta-loss: mean_i of
///   (1 - w_i) * l(student_i, target_i) + w_i * l(student_i, teacher_i)
/// with w_i = transfer_weight(T_i, l(teacher_i, target_i)). Teacher outputs
/// and targets are constants; the gradient is with respect to student outputs
/// only, with w_i held fixed.
BatchLossResult meta_loss(const MetaLossConfig& cfg, const Tensor2D& student_out,
                          const Tensor2D& teacher_out, const Tensor2D& targets);

/// Softened distillation: mean_i of
///   (1 - lambda) * l(target_i, sigma(student_i))
///   + lambda * l(sigma(teacher_i / T), sigma(student_i))
/// over logits. sigma is the logistic function for bce and row softmax for
/// cross_entropy; mse is rejected (classification-only formulation).
/// Gradient is with respect to student logits.
BatchLossResult softened_distill_loss(const DistillConfig& cfg, const Tensor2D& student_logits,
                                      const Tensor2D& teacher_logits, const Tensor2D& targets);

/// Numerically stable logistic function.
double logistic(double z);

/// In-place max-subtracted softmax over one row.
void softmax_inplace(std::span<double> row);

/// The sigma of the distillation loss: elementwise logistic for bce, row
/// softmax for cross_entropy. Also used to evaluate logit-space students.
Tensor2D probabilities_from_logits(BaseLossKind kind, const Tensor2D& logits);

} // namespace lupi
