#include <doctest.h>

#include <cmath>

#include "lupi/errors.hpp"
#include "lupi/losses.hpp"
#include "lupi/rng.hpp"
#include "support/oracles.hpp"

using namespace lupi;

namespace {

Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, cols);
    for (double& v : t.data()) v = rng.normal();
    return t;
}

Tensor2D random_probs(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, cols);
    for (double& v : t.data()) v = 0.05 + 0.9 * rng.uniform();
    return t;
}

Tensor2D random_binary(std::size_t rows, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, 1);
    for (double& v : t.data()) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    return t;
}

Tensor2D random_onehot(std::size_t rows, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, classes);
    for (std::size_t i = 0; i < rows; ++i) t(i, rng.index(classes)) = 1.0;
    return t;
}

Tensor2D random_rowstochastic(std::size_t rows, std::size_t classes, std::uint64_t seed) {
    Rng rng(seed);
    Tensor2D t(rows, classes);
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        auto row = t.row(i);
        for (double& v : row) {
            v = 0.05 + rng.uniform();
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return t;
}

} // namespace

TEST_CASE("base losses reproduce the hand values") {
    const LossResult mse = base_loss(BaseLossKind::mse, {1, 2}, {3, 2});
    CHECK(mse.value == doctest::Approx(2.0));
    CHECK(mse.grad[0] == doctest::Approx(2.0)); // 2*(3-1)/2
    CHECK(mse.grad[1] == 0.0);

    const LossResult bce = base_loss(BaseLossKind::bce, {1}, {0.5});
    CHECK(bce.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const LossResult self = base_loss(BaseLossKind::mse, {4, -1, 0.5}, {4, -1, 0.5});
    CHECK(self.value == 0.0);

    CHECK_THROWS_AS(base_loss(BaseLossKind::mse, {1}, {1, 2}), ShapeError);
    CHECK_THROWS_AS(base_loss(BaseLossKind::mse, {std::nan("")}, {1.0}), NumericError);
}

TEST_CASE("log losses stay finite at saturated probabilities") {
    CHECK(std::isfinite(base_loss(BaseLossKind::bce, {1}, {0.0}).value));
    CHECK(std::isfinite(base_loss(BaseLossKind::bce, {0}, {1.0}).value));
    CHECK(std::isfinite(base_loss(BaseLossKind::cross_entropy, {1, 0}, {0.0, 1.0}).value));
}

TEST_CASE("transfer_weight endpoints and monotonicity") {
    CHECK(transfer_weight(0.0, 5.0) == 1.0);
    CHECK(transfer_weight(1.0, 0.0) == 1.0);
    CHECK(transfer_weight(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(transfer_weight(-1.0, 1.0), DomainError);
    CHECK_THROWS_AS(transfer_weight(1.0, -0.1), DomainError);

    // Strictly decreasing in T for fixed positive loss, and in the loss for fixed T > 0;
    // always in (0, 1] with w = 1 only at T = 0 or zero teacher loss.
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double t = rng.uniform() * 10.0;
        const double l = rng.uniform() * 5.0;
        const double w = transfer_weight(t, l);
        CHECK(w > 0.0);
        CHECK(w <= 1.0);
        CHECK((w == 1.0) == (t == 0.0 || l == 0.0));
        if (l > 0.0) CHECK(transfer_weight(t + 0.5, l) < transfer_weight(t, l));
        if (t > 0.0) CHECK(transfer_weight(t, l + 0.5) < transfer_weight(t, l));
    }
}

TEST_CASE("meta_loss per-example algebra") {
    // w = 0.5, l(student, target) = 0.4, l(student, teacher) = 0.2 -> 0.3.
    // With mse on scalars: teacher loss ln2/..., easier to check the combination directly
    // through transfer_weight and per_example_loss on a crafted instance.
    const double w = 0.5;
    const double combined = (1.0 - w) * 0.4 + w * 0.2;
    CHECK(combined == doctest::Approx(0.3));

    // Teacher identical to targets: meta equals the plain base loss for every T.
    const Tensor2D targets = random_tensor(6, 2, 1);
    const Tensor2D student = random_tensor(6, 2, 2);
    for (double t : {0.0, 0.3, 2.0, 100.0}) {
        MetaLossConfig cfg;
        cfg.temperature_T = t;
        cfg.base_loss = BaseLossKind::mse;
        const BatchLossResult meta = meta_loss(cfg, student, targets, targets);
        const BatchLossResult plain = batch_base_loss(BaseLossKind::mse, targets, student);
        CHECK(meta.value == doctest::Approx(plain.value).epsilon(1e-12));
    }
}

TEST_CASE("meta_loss with T = 0 is exactly the teacher-mimic loss") {
    const Tensor2D student = random_probs(8, 1, 4);
    const Tensor2D teacher = random_probs(8, 1, 5);
    const Tensor2D targets = random_binary(8, 6);
    MetaLossConfig cfg;
    cfg.temperature_T = 0.0;
    cfg.base_loss = BaseLossKind::bce;
    const BatchLossResult meta = meta_loss(cfg, student, teacher, targets);
    const BatchLossResult mimic = batch_base_loss(BaseLossKind::bce, teacher, student);
    CHECK(meta.value == mimic.value);
    CHECK(meta.grad == mimic.grad);
}

TEST_CASE("meta_loss with vanishing weights collapses to the plain loss") {
    const Tensor2D student = random_tensor(10, 1, 7);
    const Tensor2D targets = random_tensor(10, 1, 8);
    Tensor2D teacher = targets;
    for (double& v : teacher.data()) v += 1.0; // teacher loss 1 per example
    MetaLossConfig cfg;
    cfg.temperature_T = 50.0; // w = e^-50 < 1e-21
    cfg.base_loss = BaseLossKind::mse;
    const BatchLossResult meta = meta_loss(cfg, student, teacher, targets);
    const BatchLossResult plain = batch_base_loss(BaseLossKind::mse, targets, student);
    CHECK(std::abs(meta.value - plain.value) < 1e-9);
}

TEST_CASE("per-example meta-loss lies between its two component losses") {
    Rng rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor2D student = random_tensor(1, 3, 100 + trial);
        const Tensor2D teacher = random_tensor(1, 3, 200 + trial);
        const Tensor2D targets = random_tensor(1, 3, 300 + trial);
        MetaLossConfig cfg;
        cfg.temperature_T = rng.uniform() * 3.0;
        cfg.base_loss = BaseLossKind::mse;
        const double value = meta_loss(cfg, student, teacher, targets).value;
        const double l_target = per_example_loss(BaseLossKind::mse, targets.row(0), student.row(0));
        const double l_teacher = per_example_loss(BaseLossKind::mse, teacher.row(0), student.row(0));
        CHECK(value >= std::min(l_target, l_teacher) - 1e-12);
        CHECK(value <= std::max(l_target, l_teacher) + 1e-12);
    }
}

TEST_CASE("per-example T overrides the scalar temperature pointwise") {
    const Tensor2D student = random_probs(3, 1, 10);
    const Tensor2D teacher = random_probs(3, 1, 11);
    const Tensor2D targets = random_binary(3, 12);

    MetaLossConfig cfg;
    cfg.temperature_T = 123.0; // should be ignored
    cfg.base_loss = BaseLossKind::bce;
    cfg.per_example_T = Vector{0.0, 1.0, 2.0};
    const double mixed = meta_loss(cfg, student, teacher, targets).value;

    double expect = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double tl = per_example_loss(BaseLossKind::bce, targets.row(i), teacher.row(i));
        const double w = transfer_weight((*cfg.per_example_T)[i], tl);
        const double lt = per_example_loss(BaseLossKind::bce, targets.row(i), student.row(i));
        const double lm = per_example_loss(BaseLossKind::bce, teacher.row(i), student.row(i));
        expect += (1.0 - w) * lt + w * lm;
    }
    expect /= 3.0;
    CHECK(mixed == doctest::Approx(expect).epsilon(1e-12));

    cfg.per_example_T = Vector{0.0, 1.0};
    CHECK_THROWS_AS(meta_loss(cfg, student, teacher, targets), ShapeError);
    cfg.per_example_T = Vector{0.0, 1.0, -1.0};
    CHECK_THROWS_AS(meta_loss(cfg, student, teacher, targets), DomainError);
}

TEST_CASE("meta_loss gradient matches finite differences") {
    MetaLossConfig mse_cfg;
    mse_cfg.temperature_T = 0.7;
    mse_cfg.base_loss = BaseLossKind::mse;
    const Tensor2D teacher = random_tensor(5, 2, 21);
    const Tensor2D targets = random_tensor(5, 2, 22);
    CHECK(oracles::loss_input_fd_error(
              [&](const Tensor2D& s) { return meta_loss(mse_cfg, s, teacher, targets); },
              random_tensor(5, 2, 20)) < 1e-5);

    MetaLossConfig bce_cfg;
    bce_cfg.temperature_T = 1.3;
    bce_cfg.base_loss = BaseLossKind::bce;
    const Tensor2D teacher_p = random_probs(6, 1, 24);
    const Tensor2D targets_b = random_binary(6, 25);
    CHECK(oracles::loss_input_fd_error(
              [&](const Tensor2D& s) { return meta_loss(bce_cfg, s, teacher_p, targets_b); },
              random_probs(6, 1, 23)) < 1e-5);

    MetaLossConfig ce_cfg;
    ce_cfg.temperature_T = 0.4;
    ce_cfg.base_loss = BaseLossKind::cross_entropy;
    const Tensor2D teacher_soft = random_rowstochastic(4, 3, 27);
    const Tensor2D targets_1h = random_onehot(4, 3, 28);
    CHECK(oracles::loss_input_fd_error(
              [&](const Tensor2D& s) { return meta_loss(ce_cfg, s, teacher_soft, targets_1h); },
              random_rowstochastic(4, 3, 26)) < 1e-5);
}

TEST_CASE("softened distillation collapses for lambda 0 and rejects mse") {
    const Tensor2D student = random_tensor(7, 1, 31);
    const Tensor2D teacher = random_tensor(7, 1, 32);
    const Tensor2D targets = random_binary(7, 33);

    DistillConfig cfg;
    cfg.lambda = 0.0;
    cfg.temperature_T = 3.0;
    cfg.base_loss = BaseLossKind::bce;
    const BatchLossResult collapsed = softened_distill_loss(cfg, student, teacher, targets);
    const BatchLossResult plain = batch_base_loss(
        BaseLossKind::bce, targets, probabilities_from_logits(BaseLossKind::bce, student));
    CHECK(collapsed.value == plain.value);

    // Independent of teacher logits and T at lambda 0.
    cfg.temperature_T = 0.25;
    const BatchLossResult other =
        softened_distill_loss(cfg, student, random_tensor(7, 1, 34), targets);
    CHECK(other.value == collapsed.value);

    cfg.base_loss = BaseLossKind::mse;
    CHECK_THROWS_AS(softened_distill_loss(cfg, student, teacher, targets), UnsupportedModeError);

    cfg.base_loss = BaseLossKind::bce;
    cfg.lambda = 1.5;
    CHECK_THROWS_AS(softened_distill_loss(cfg, student, teacher, targets), DomainError);
}

TEST_CASE("zero teacher logits soften to the uniform distribution") {
    DistillConfig cfg;
    cfg.lambda = 1.0;
    cfg.temperature_T = 7.0;
    cfg.base_loss = BaseLossKind::cross_entropy;
    // With teacher logits all zero the soft target is uniform, so the loss is
    // cross-entropy of the student against uniform.
    const Tensor2D teacher(2, 4);
    const Tensor2D student = random_tensor(2, 4, 35);
    const Tensor2D targets = random_onehot(2, 4, 36);
    const BatchLossResult got = softened_distill_loss(cfg, student, teacher, targets);

    const Tensor2D student_p = probabilities_from_logits(BaseLossKind::cross_entropy, student);
    double expect = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 4; ++j) expect -= 0.25 * std::log(student_p(i, j));
    expect /= 2.0;
    CHECK(got.value == doctest::Approx(expect).epsilon(1e-12));

    // Binary flavor: sigma(0) = 0.5.
    DistillConfig bin;
    bin.lambda = 1.0;
    bin.temperature_T = 2.0;
    bin.base_loss = BaseLossKind::bce;
    const Tensor2D z(3, 1);
    const Tensor2D got_bin = softened_distill_loss(bin, z, z, random_binary(3, 37)).grad;
    // Student at sigma(0) = 0.5 exactly matches the soft target 0.5, so the
    // gradient vanishes.
    for (double g : got_bin.data()) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("binary distillation hand value: everything at logit zero") {
    // lambda = 0.5, T = 1, student logit 0, teacher logit 0, target 1:
    // both BCE terms are ln 2 at p = 0.5.
    DistillConfig cfg;
    cfg.lambda = 0.5;
    cfg.temperature_T = 1.0;
    cfg.base_loss = BaseLossKind::bce;
    const Tensor2D zero(1, 1);
    const Tensor2D target = Tensor2D::from_rows({{1.0}});
    const BatchLossResult got = softened_distill_loss(cfg, zero, zero, target);
    CHECK(got.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("softened distillation gradient matches finite differences") {
    DistillConfig bin;
    bin.lambda = 0.35;
    bin.temperature_T = 2.5;
    bin.base_loss = BaseLossKind::bce;
    const Tensor2D teacher = random_tensor(6, 1, 41);
    const Tensor2D targets = random_binary(6, 42);
    CHECK(oracles::loss_input_fd_error(
              [&](const Tensor2D& s) { return softened_distill_loss(bin, s, teacher, targets); },
              random_tensor(6, 1, 40)) < 1e-5);

    DistillConfig multi;
    multi.lambda = 0.6;
    multi.temperature_T = 4.0;
    multi.base_loss = BaseLossKind::cross_entropy;
    const Tensor2D teacher_mc = random_tensor(5, 3, 44);
    const Tensor2D targets_mc = random_onehot(5, 3, 45);
    CHECK(oracles::loss_input_fd_error(
              [&](const Tensor2D& s) { return softened_distill_loss(multi, s, teacher_mc, targets_mc); },
              random_tensor(5, 3, 43)) < 1e-5);
}
