#include "lupi/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lupi/errors.hpp"

namespace lupi {

namespace {

double clamp_prob(double p) {
    return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

void check_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw ShapeError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
}

void check_same_shape(const Tensor2D& a, const Tensor2D& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()) + ")");
}

void check_finite(const Tensor2D& t, const char* what) {
    if (!t.all_finite())
        throw NumericError(std::string(what) + ": non-finite input");
}

// Per-example loss and its gradient with respect to the prediction entries.
// grad points at a buffer of prediction.size() doubles; the caller scales by
// any outer weights and 1/N.
double per_example_loss_grad(BaseLossKind kind, std::span<const double> target,
                             std::span<const double> prediction, double* grad) {
    const std::size_t n = target.size();
    double value = 0.0;
    switch (kind) {
    case BaseLossKind::mse: {
        for (std::size_t j = 0; j < n; ++j) {
            const double diff = prediction[j] - target[j];
            value += diff * diff;
            if (grad) grad[j] = 2.0 * diff / static_cast<double>(n);
        }
        value /= static_cast<double>(n);
        break;
    }
    case BaseLossKind::bce: {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = clamp_prob(prediction[j]);
            const double y = target[j];
            value -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
            if (grad) grad[j] = (-y / p + (1.0 - y) / (1.0 - p)) / static_cast<double>(n);
        }
        value /= static_cast<double>(n);
        break;
    }
    case BaseLossKind::cross_entropy: {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = clamp_prob(prediction[j]);
            value -= target[j] * std::log(p);
            if (grad) grad[j] = -target[j] / p;
        }
        break;
    }
    }
    return value;
}

} // namespace

double per_example_loss(BaseLossKind kind, std::span<const double> target,
                        std::span<const double> prediction) {
    check_same_length(target.size(), prediction.size(), "per_example_loss");
    return per_example_loss_grad(kind, target, prediction, nullptr);
}

LossResult base_loss(BaseLossKind kind, const Vector& target, const Vector& prediction) {
    check_same_length(target.size(), prediction.size(), "base_loss");
    for (double v : target)
        if (!std::isfinite(v)) throw NumericError("base_loss: non-finite target");
    for (double v : prediction)
        if (!std::isfinite(v)) throw NumericError("base_loss: non-finite prediction");
    LossResult out;
    out.grad.resize(prediction.size());
    out.value = per_example_loss_grad(kind, target, prediction, out.grad.data());
    return out;
}

BatchLossResult batch_base_loss(BaseLossKind kind, const Tensor2D& targets,
                                const Tensor2D& predictions) {
    check_same_shape(targets, predictions, "batch_base_loss");
    check_finite(targets, "batch_base_loss targets");
    check_finite(predictions, "batch_base_loss predictions");
    const std::size_t n = targets.rows();
    if (n == 0) throw ShapeError("batch_base_loss: empty batch");
    BatchLossResult out;
    out.grad = Tensor2D(n, targets.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += per_example_loss_grad(kind, targets.row(i), predictions.row(i),
                                       out.grad.row(i).data());
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.value = total * inv_n;
    for (double& g : out.grad.data()) g *= inv_n;
    return out;
}

double transfer_weight(double temperature, double teacher_loss) {
    if (!(temperature >= 0.0))
        throw DomainError("transfer_weight: temperature must be >= 0");
    if (!(teacher_loss >= 0.0))
        throw DomainError("transfer_weight: teacher loss must be >= 0");
    return std::exp(-temperature * teacher_loss);
}

void MetaLossConfig::validate() const {
    if (!(temperature_T >= 0.0) || !std::isfinite(temperature_T))
        throw DomainError("MetaLossConfig: temperature_T must be finite and >= 0");
    if (per_example_T) {
        for (double t : *per_example_T)
            if (!(t >= 0.0) || !std::isfinite(t))
                throw DomainError("MetaLossConfig: every per-example T must be finite and >= 0");
    }
}

void DistillConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw DomainError("DistillConfig: lambda must lie in [0, 1]");
    if (!(temperature_T > 0.0) || !std::isfinite(temperature_T))
        throw DomainError("DistillConfig: temperature_T must be finite and > 0");
    if (base_loss == BaseLossKind::mse)
        throw UnsupportedModeError("DistillConfig: mse is not a classification loss");
}

BatchLossResult meta_loss(const MetaLossConfig& cfg, const Tensor2D& student_out,
                          const Tensor2D& teacher_out, const Tensor2D& targets) {
    cfg.validate();
    check_same_shape(student_out, targets, "meta_loss student/targets");
    check_same_shape(teacher_out, targets, "meta_loss teacher/targets");
    check_finite(student_out, "meta_loss student outputs");
    check_finite(teacher_out, "meta_loss teacher outputs");
    check_finite(targets, "meta_loss targets");
    const std::size_t n = targets.rows();
    if (n == 0) throw ShapeError("meta_loss: empty batch");
    if (cfg.per_example_T && cfg.per_example_T->size() != n)
        throw ShapeError("meta_loss: per_example_T length " +
                         std::to_string(cfg.per_example_T->size()) + " != batch rows " +
                         std::to_string(n));

    const std::size_t dim = targets.cols();
    BatchLossResult out;
    out.grad = Tensor2D(n, dim);
    Vector target_grad(dim), teacher_grad(dim);
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double temp = cfg.per_example_T ? (*cfg.per_example_T)[i] : cfg.temperature_T;
        const double teacher_loss =
            per_example_loss_grad(cfg.base_loss, targets.row(i), teacher_out.row(i), nullptr);
        const double w = transfer_weight(temp, teacher_loss);

        const double l_target = per_example_loss_grad(cfg.base_loss, targets.row(i),
                                                      student_out.row(i), target_grad.data());
        const double l_teacher = per_example_loss_grad(cfg.base_loss, teacher_out.row(i),
                                                       student_out.row(i), teacher_grad.data());
        total += (1.0 - w) * l_target + w * l_teacher;
        auto g = out.grad.row(i);
        for (std::size_t j = 0; j < dim; ++j)
            g[j] = ((1.0 - w) * target_grad[j] + w * teacher_grad[j]) * inv_n;
    }
    out.value = total * inv_n;
    return out;
}

double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void softmax_inplace(std::span<double> row) {
    double zmax = row[0];
    for (double v : row) zmax = std::max(zmax, v);
    double sum = 0.0;
    for (double& v : row) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : row) v /= sum;
}

Tensor2D probabilities_from_logits(BaseLossKind kind, const Tensor2D& logits) {
    if (kind == BaseLossKind::mse)
        throw UnsupportedModeError("probabilities_from_logits: mse has no sigma");
    Tensor2D p = logits;
    if (kind == BaseLossKind::cross_entropy) {
        for (std::size_t i = 0; i < p.rows(); ++i) softmax_inplace(p.row(i));
    } else {
        for (double& v : p.data()) v = logistic(v);
    }
    return p;
}

BatchLossResult softened_distill_loss(const DistillConfig& cfg, const Tensor2D& student_logits,
                                      const Tensor2D& teacher_logits, const Tensor2D& targets) {
    cfg.validate();
    check_same_shape(student_logits, targets, "softened_distill_loss student/targets");
    check_same_shape(teacher_logits, targets, "softened_distill_loss teacher/targets");
    check_finite(student_logits, "softened_distill_loss student logits");
    check_finite(teacher_logits, "softened_distill_loss teacher logits");
    check_finite(targets, "softened_distill_loss targets");
    const std::size_t n = targets.rows();
    if (n == 0) throw ShapeError("softened_distill_loss: empty batch");

    const std::size_t dim = targets.cols();
    const bool multiclass = cfg.base_loss == BaseLossKind::cross_entropy;
    BatchLossResult out;
    out.grad = Tensor2D(n, dim);
    Vector student_p(dim), teacher_soft(dim), target_grad(dim), teacher_grad(dim);
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = student_logits.row(i);
        const auto t = teacher_logits.row(i);
        if (multiclass) {
            for (std::size_t j = 0; j < dim; ++j) student_p[j] = s[j];
            softmax_inplace(student_p);
            for (std::size_t j = 0; j < dim; ++j) teacher_soft[j] = t[j] / cfg.temperature_T;
            softmax_inplace(teacher_soft);
        } else {
            for (std::size_t j = 0; j < dim; ++j) {
                student_p[j] = logistic(s[j]);
                teacher_soft[j] = logistic(t[j] / cfg.temperature_T);
            }
        }

        const double l_target = per_example_loss_grad(cfg.base_loss, targets.row(i),
                                                      {student_p.data(), dim}, target_grad.data());
        const double l_teacher = per_example_loss_grad(cfg.base_loss,
                                                       {teacher_soft.data(), dim},
                                                       {student_p.data(), dim}, teacher_grad.data());
        total += (1.0 - cfg.lambda) * l_target + cfg.lambda * l_teacher;

        // d loss / d p, then the chain through sigma back to the logits.
        auto g = out.grad.row(i);
        if (multiclass) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double gp = (1.0 - cfg.lambda) * target_grad[j] + cfg.lambda * teacher_grad[j];
                target_grad[j] = gp; // reuse as combined d loss / d p
                dot += gp * student_p[j];
            }
            for (std::size_t j = 0; j < dim; ++j)
                g[j] = student_p[j] * (target_grad[j] - dot) * inv_n;
        } else {
            for (std::size_t j = 0; j < dim; ++j) {
                const double gp = (1.0 - cfg.lambda) * target_grad[j] + cfg.lambda * teacher_grad[j];
                g[j] = gp * student_p[j] * (1.0 - student_p[j]) * inv_n;
            }
        }
    }
    out.value = total * inv_n;
    return out;
}

} // namespace lupi
