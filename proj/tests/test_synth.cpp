#include <doctest.h>

#include <cmath>
#include <set>

#include "lupi/errors.hpp"
#include "lupi/synth.hpp"
#include "support/oracles.hpp"

using namespace lupi;

namespace {

SynthConfig config(Scenario scenario, TaskKind task, std::size_t n_train, std::size_t n_test,
                   std::uint64_t seed) {
    SynthConfig cfg;
    cfg.scenario = scenario;
    cfg.task = task;
    cfg.n_train = n_train;
    cfg.n_test = n_test;
    cfg.seed = seed;
    return cfg;
}

double mean(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double correlation(const Vector& a, const Vector& b) {
    const double ma = mean(a), mb = mean(b);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return cov / std::sqrt(va * vb);
}

double positive_fraction(const Tensor2D& y) {
    double s = 0.0;
    for (double v : y.data()) s += v;
    return s / static_cast<double>(y.rows());
}

} // namespace

TEST_CASE("clean_labels: shapes, balance and score correlation") {
    const SplitPair small =
        gen_clean_labels(config(Scenario::clean_labels, TaskKind::classification, 200, 50, 3));
    CHECK(small.train.X.rows() == 200);
    CHECK(small.train.X.cols() == 50);
    CHECK(small.train.X_star.cols() == 1);
    CHECK(small.train.y.cols() == 1);
    CHECK(small.test.X.rows() == 50);
    small.train.validate();

    // Monte Carlo: labels are 1(symmetric zero-mean score > 0).
    const SplitPair big =
        gen_clean_labels(config(Scenario::clean_labels, TaskKind::classification, 10000, 1, 4));
    CHECK(positive_fraction(big.train.y) == doctest::Approx(0.5).epsilon(0.04));

    // Monte Carlo: regression target is x* + unit noise, and var(x*) ~ d >> 1.
    const SplitPair reg =
        gen_clean_labels(config(Scenario::clean_labels, TaskKind::regression, 10000, 1, 5));
    Vector score(10000), target(10000);
    for (std::size_t i = 0; i < 10000; ++i) {
        score[i] = reg.train.X_star(i, 0);
        target[i] = reg.train.y(i, 0);
    }
    CHECK(correlation(score, target) > 0.98);
}

TEST_CASE("clean_features: additive unit noise and target scale") {
    const SplitPair pair = gen_clean_features(
        config(Scenario::clean_features, TaskKind::regression, 10000, 1, 6));
    CHECK(pair.train.X.cols() == 50);
    CHECK(pair.train.X_star.cols() == 50);

    // Per-column sample variance of X - X_star is about 1.
    for (std::size_t c = 0; c < 5; ++c) {
        Vector diff(10000);
        for (std::size_t i = 0; i < 10000; ++i)
            diff[i] = pair.train.X(i, c) - pair.train.X_star(i, c);
        const double m = mean(diff);
        double var = 0.0;
        for (double v : diff) var += (v - m) * (v - m);
        var /= static_cast<double>(diff.size());
        CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    }

    // Target std is about sqrt(50) for d = 50.
    Vector y(10000);
    for (std::size_t i = 0; i < 10000; ++i) y[i] = pair.train.y(i, 0);
    const double m = mean(y);
    double var = 0.0;
    for (double v : y) var += (v - m) * (v - m);
    CHECK(std::sqrt(var / 10000.0) == doctest::Approx(std::sqrt(50.0)).epsilon(0.06));

    // Same seed reproduces both splits bit for bit.
    const SplitPair again = gen_clean_features(
        config(Scenario::clean_features, TaskKind::regression, 10000, 1, 6));
    CHECK(again.train.X == pair.train.X);
    CHECK(again.test.X_star == pair.test.X_star);
    CHECK(again.train.y == pair.train.y);
}

TEST_CASE("relevant_features: privileged columns are a slice of X and alpha is recoverable") {
    const SplitPair pair = gen_relevant_features(
        config(Scenario::relevant_features, TaskKind::regression, 200, 100, 7));
    CHECK(pair.train.X_star.cols() == 3);

    // Each privileged column equals one column of X, shared across splits.
    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t source = 50;
        for (std::size_t cand = 0; cand < 50; ++cand) {
            bool matches = true;
            for (std::size_t i = 0; i < 200 && matches; ++i)
                matches = pair.train.X(i, cand) == pair.train.X_star(i, c);
            if (matches) {
                source = cand;
                break;
            }
        }
        REQUIRE(source < 50);
        for (std::size_t i = 0; i < 100; ++i)
            CHECK(pair.test.X(i, source) == pair.test.X_star(i, c));
    }

    // Noiseless linear system: least squares on X_star recovers alpha,
    // and the residual on the training targets is essentially zero.
    Vector y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = pair.train.y(i, 0);
    const Vector alpha_hat = oracles::least_squares(pair.train.X_star, y);
    for (std::size_t i = 0; i < 200; ++i) {
        double fit = 0.0;
        for (std::size_t c = 0; c < 3; ++c) fit += alpha_hat[c] * pair.train.X_star(i, c);
        CHECK(std::abs(fit - y[i]) < 1e-9);
    }

    const SplitPair balance = gen_relevant_features(
        config(Scenario::relevant_features, TaskKind::classification, 10000, 1, 8));
    CHECK(positive_fraction(balance.train.y) == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("sample_dependent: per-row subsets, full index coverage, no global linear map") {
    const SplitPair pair = gen_sample_dependent(
        config(Scenario::sample_dependent, TaskKind::regression, 10000, 10, 9));

    // Every privileged value appears somewhere in its own input row.
    std::set<std::size_t> used_indices;
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            bool found = false;
            for (std::size_t j = 0; j < 50; ++j) {
                if (pair.train.X(i, j) == pair.train.X_star(i, c)) {
                    found = true;
                    used_indices.insert(j);
                    break;
                }
            }
            CHECK(found);
        }
    }

    // Coupon collector over 10000 rows: every input index gets picked eventually.
    std::set<std::size_t> all_used;
    for (std::size_t i = 0; i < 10000; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t j = 0; j < 50; ++j)
                if (pair.train.X(i, j) == pair.train.X_star(i, c)) all_used.insert(j);
    CHECK(all_used.size() == 50);

    // No global linear map: least squares on the full X leaves a large residual,
    // unlike the relevant_features case above.
    Vector y(10000);
    for (std::size_t i = 0; i < 10000; ++i) y[i] = pair.train.y(i, 0);
    const Vector beta = oracles::least_squares(pair.train.X, y);
    double sq = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < 50; ++j) fit += beta[j] * pair.train.X(i, j);
        sq += (fit - y[i]) * (fit - y[i]);
    }
    CHECK(std::sqrt(sq / 10000.0) > 0.5);
}

TEST_CASE("classification labels are exactly the stated indicator") {
    const SplitPair pair = gen_clean_features(
        config(Scenario::clean_features, TaskKind::classification, 500, 10, 10));
    for (double v : pair.train.y.data()) CHECK((v == 0.0 || v == 1.0));
    CHECK(pair.train.X.all_finite());
    CHECK(pair.train.X_star.all_finite());
    CHECK(pair.train.y.all_finite());
}

TEST_CASE("generate dispatches and validates") {
    SynthConfig cfg = config(Scenario::relevant_features, TaskKind::regression, 10, 10, 1);
    CHECK(generate(cfg).train.X_star.cols() == 3);
    cfg.d_star = 0;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.d_star = 60;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
    cfg.d_star = 3;
    cfg.n_train = 0;
    CHECK_THROWS_AS(generate(cfg), ConfigError);
}

TEST_CASE("binary-label regression reinterprets classification targets") {
    const SplitPair pair = gen_relevant_features(
        config(Scenario::relevant_features, TaskKind::classification, 50, 10, 11));
    const LupiDataset reg = to_binary_label_regression(pair.train);
    CHECK(reg.task == TaskKind::regression);
    CHECK(reg.y == pair.train.y);
    CHECK_THROWS_AS(to_binary_label_regression(reg), DomainError);
}
