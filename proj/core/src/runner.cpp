#include "lupi/runner.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "lupi/errors.hpp"

namespace lupi {

using ordered_json = nlohmann::ordered_json;

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point start) {
    return std::chrono::duration<double>(clock::now() - start).count();
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    return base * 1000003ULL + stream;
}

constexpr std::uint64_t kTeacherStream = 1;
constexpr std::uint64_t kStudentStream = 2; // shared by the plain and LUPI students
constexpr std::uint64_t kShuffleStream = 3;

BaseLossKind base_loss_for(TaskKind task, std::size_t out_dim) {
    if (task == TaskKind::regression) return BaseLossKind::mse;
    return out_dim > 1 ? BaseLossKind::cross_entropy : BaseLossKind::bce;
}

Activation output_activation_for(TaskKind task, std::size_t out_dim, bool logit_space) {
    if (task == TaskKind::regression || logit_space) return Activation::linear;
    return out_dim > 1 ? Activation::softmax : Activation::sigmoid;
}

struct SpecRequest {
    std::size_t input_dim = 0;
    std::size_t out_dim = 0;
    TaskKind task = TaskKind::regression;
    bool logit_space = false; // distill_eq1 students emit logits
    std::uint64_t seed = 0;
};

ModelSpec build_spec(const ExperimentPlan& plan, const SpecRequest& req) {
    ModelSpec spec;
    spec.input_dim = req.input_dim;
    spec.seed = req.seed;
    std::vector<std::size_t> hidden = plan.hidden;
    Activation hidden_act = Activation::relu;
    if (hidden.empty()) {
        switch (plan.experiment) {
        case ExperimentKind::synthetic:
            break; // single layer; hidden units only when asked for
        case ExperimentKind::mnist:
            hidden = {16, 32};
            break;
        case ExperimentKind::tabular:
            hidden = {req.input_dim};
            hidden_act = Activation::linear;
            break;
        }
    }
    for (std::size_t width : hidden) spec.layers.push_back({width, hidden_act});
    spec.layers.push_back({req.out_dim, output_activation_for(req.task, req.out_dim,
                                                              req.logit_space)});
    return spec;
}

TrainConfig train_config_for(const ExperimentPlan& plan) {
    TrainConfig cfg = plan.train;
    cfg.seed = mix_seed(plan.base_seed, kShuffleStream);
    return cfg;
}

Model fit_plain(const ExperimentPlan& plan, const Tensor2D& features, const Tensor2D& targets,
                TaskKind task, std::uint64_t seed) {
    SpecRequest req;
    req.input_dim = features.cols();
    req.out_dim = targets.cols();
    req.task = task;
    req.seed = seed;
    const ModelSpec spec = build_spec(plan, req);
    const BaseLossKind kind = base_loss_for(task, targets.cols());
    const TrainConfig cfg = train_config_for(plan);
    return fit(init_model(spec), features, cfg,
               [&](const Tensor2D& outputs, std::span<const std::size_t> rows) {
                   return batch_base_loss(kind, targets.gather_rows(rows), outputs);
               });
}

Vector argmax_labels(const Tensor2D& rows_of_scores) {
    Vector labels(rows_of_scores.rows());
    for (std::size_t i = 0; i < rows_of_scores.rows(); ++i) {
        const auto row = rows_of_scores.row(i);
        std::size_t best = 0;
        for (std::size_t j = 1; j < row.size(); ++j)
            if (row[j] > row[best]) best = j;
        labels[i] = static_cast<double>(best);
    }
    return labels;
}

Vector threshold_labels(const Vector& probabilities) {
    Vector labels(probabilities.size());
    for (std::size_t i = 0; i < probabilities.size(); ++i)
        labels[i] = probabilities[i] > 0.5 ? 1.0 : 0.0; // exactly 0.5 maps to class 0
    return labels;
}

Vector first_column(const Tensor2D& t) {
    Vector v(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) v[i] = t(i, 0);
    return v;
}

} // namespace

void ExperimentPlan::validate() const {
    if (repetitions < 1) throw ConfigError("ExperimentPlan: repetitions must be >= 1");
    meta.validate();
    if (loss == LossMode::distill_eq1) distill.validate();
    train.validate();
    switch (experiment) {
    case ExperimentKind::synthetic:
        synth.validate();
        if (binary_label_regression && synth.task != TaskKind::regression)
            throw ConfigError("ExperimentPlan: binary-label regression is a regression task");
        break;
    case ExperimentKind::mnist:
        if (idx_train_images.empty() || idx_train_labels.empty() || idx_test_images.empty() ||
            idx_test_labels.empty())
            throw ConfigError("ExperimentPlan: mnist mode needs all four IDX paths");
        if (train_n < 1) throw ConfigError("ExperimentPlan: train_n must be >= 1");
        break;
    case ExperimentKind::tabular:
        if (csv_path.empty()) throw ConfigError("ExperimentPlan: tabular mode needs csv_path");
        break;
    }
}

MetricReport evaluate_predictions(TaskKind task, const Tensor2D& targets,
                                  const Tensor2D& predictions) {
    MetricReport report;
    if (task == TaskKind::regression) {
        const Vector y = first_column(targets);
        const Vector p = first_column(predictions);
        report.rmse = rmse(y, p);
        try {
            report.spearman = spearman(y, p);
        } catch (const UndefinedMetricError&) {
        }
        return report;
    }
    if (targets.cols() > 1) {
        report.accuracy = accuracy(argmax_labels(targets), argmax_labels(predictions));
        return report;
    }
    const Vector y = first_column(targets);
    const Vector probs = first_column(predictions);
    report.accuracy = accuracy(y, threshold_labels(probs));
    try {
        report.auc_roc = auc_roc(y, probs);
    } catch (const UndefinedMetricError&) {
    }
    try {
        report.auc_pr = auc_pr(y, probs);
    } catch (const UndefinedMetricError&) {
    }
    return report;
}

Model train_teacher(const ExperimentPlan& plan, const LupiDataset& train) {
    train.validate();
    if (train.X_star.cols() == 0)
        throw ConfigError("train_teacher: dataset has no privileged features");
    return fit_plain(plan, train.X_star, train.y, train.task,
                     mix_seed(plan.base_seed, kTeacherStream));
}

Model train_input_model(const ExperimentPlan& plan, const LupiDataset& train) {
    train.validate();
    return fit_plain(plan, train.X, train.y, train.task,
                     mix_seed(plan.base_seed, kStudentStream));
}

Model train_student_lupi(const ExperimentPlan& plan, const LupiDataset& train,
                         const Model& teacher) {
    train.validate();
    if (plan.loss == LossMode::plain)
        throw UnsupportedModeError("train_student_lupi: loss mode must be eq1 or eq2");
    const TaskKind task = train.task;
    const std::size_t out_dim = train.y.cols();
    const BaseLossKind kind = base_loss_for(task, out_dim);
    const TrainConfig cfg = train_config_for(plan);

    SpecRequest req;
    req.input_dim = train.X.cols();
    req.out_dim = out_dim;
    req.task = task;
    req.seed = mix_seed(plan.base_seed, kStudentStream);

    if (plan.loss == LossMode::distill_eq1) {
        if (task == TaskKind::regression)
            throw UnsupportedModeError(
                "train_student_lupi: softened distillation is classification-only");
        req.logit_space = true;
        const ModelSpec spec = build_spec(plan, req);
        DistillConfig distill = plan.distill;
        distill.base_loss = kind;
        // Teacher logits are constants for the whole of student training.
        const Tensor2D teacher_logits = forward_logits(teacher, train.X_star);
        return fit(init_model(spec), train.X, cfg,
                   [&, distill](const Tensor2D& outputs, std::span<const std::size_t> rows) {
                       return softened_distill_loss(distill, outputs,
                                                    teacher_logits.gather_rows(rows),
                                                    train.y.gather_rows(rows));
                   });
    }

    const ModelSpec spec = build_spec(plan, req);
    MetaLossConfig meta = plan.meta;
    meta.base_loss = kind;
    if (meta.per_example_T && meta.per_example_T->size() != train.rows())
        throw ShapeError("train_student_lupi: per_example_T length does not match training rows");
    const Tensor2D teacher_out = forward(teacher, train.X_star);
    return fit(init_model(spec), train.X, cfg,
               [&, meta](const Tensor2D& outputs, std::span<const std::size_t> rows) {
                   MetaLossConfig sliced = meta;
                   if (meta.per_example_T) {
                       Vector t(rows.size());
                       for (std::size_t i = 0; i < rows.size(); ++i)
                           t[i] = (*meta.per_example_T)[rows[i]];
                       sliced.per_example_T = std::move(t);
                   }
                   return meta_loss(sliced, outputs, teacher_out.gather_rows(rows),
                                    train.y.gather_rows(rows));
               });
}

namespace {

// Model outputs converted to the evaluation scale: distillation students emit
// logits, everything else already emits probabilities or values.
Tensor2D predictions_for_eval(const Model& model, const Tensor2D& features, TaskKind task,
                              bool logit_space) {
    Tensor2D out = forward(model, features);
    if (logit_space && task == TaskKind::classification)
        return probabilities_from_logits(base_loss_for(task, out.cols()), out);
    return out;
}

struct RepetitionOutcome {
    MetricReport privileged;
    MetricReport input;
    MetricReport lupi;
};

RepetitionOutcome run_one_repetition(const ExperimentPlan& rep_plan, const LupiDataset& train,
                                     const LupiDataset& test, PhaseTimings& timings) {
    RepetitionOutcome outcome;

    auto t0 = clock::now();
    const Model teacher = train_teacher(rep_plan, train);
    timings.teacher_s += seconds_since(t0);

    t0 = clock::now();
    const Model input_model = train_input_model(rep_plan, train);
    timings.input_s += seconds_since(t0);

    t0 = clock::now();
    const Model lupi_model = rep_plan.loss == LossMode::plain
                                 ? input_model
                                 : train_student_lupi(rep_plan, train, teacher);
    timings.lupi_s += seconds_since(t0);

    t0 = clock::now();
    const bool lupi_logits = rep_plan.loss == LossMode::distill_eq1;
    outcome.privileged = evaluate_predictions(
        test.task, test.y, predictions_for_eval(teacher, test.X_star, test.task, false));
    outcome.input = evaluate_predictions(
        test.task, test.y, predictions_for_eval(input_model, test.X, test.task, false));
    outcome.lupi = evaluate_predictions(
        test.task, test.y, predictions_for_eval(lupi_model, test.X, test.task, lupi_logits));
    timings.eval_s += seconds_since(t0);
    return outcome;
}

const std::array<std::pair<const char*, std::optional<double> MetricReport::*>, 5> kMetricFields{{
    {"accuracy", &MetricReport::accuracy},
    {"rmse", &MetricReport::rmse},
    {"spearman", &MetricReport::spearman},
    {"auc_roc", &MetricReport::auc_roc},
    {"auc_pr", &MetricReport::auc_pr},
}};

void finalize_aggregates(ModelResults& results) {
    results.aggregates.clear();
    for (const auto& [name, field] : kMetricFields) {
        Vector values;
        for (const MetricReport& rep : results.per_repetition)
            if (rep.*field) values.push_back(*(rep.*field));
        if (!values.empty()) results.aggregates[name] = aggregate(values);
    }
}

Tensor2D one_hot(const Vector& labels, std::size_t classes) {
    Tensor2D y(labels.size(), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double l = labels[i];
        if (l < 0.0 || l >= static_cast<double>(classes) || l != std::floor(l))
            throw DomainError("one_hot: label " + std::to_string(l) + " outside 0.." +
                              std::to_string(classes - 1));
        y(i, static_cast<std::size_t>(l)) = 1.0;
    }
    return y;
}

ExperimentReport run_synthetic(const ExperimentPlan& plan) {
    ExperimentReport report;
    report.plan = plan;
    for (std::size_t rep = 0; rep < plan.repetitions; ++rep) {
        ExperimentPlan rep_plan = plan;
        rep_plan.base_seed = plan.base_seed + rep;

        auto t0 = clock::now();
        SynthConfig cfg = plan.synth;
        cfg.seed = rep_plan.base_seed;
        if (plan.binary_label_regression) cfg.task = TaskKind::classification;
        SplitPair data = generate(cfg);
        if (plan.binary_label_regression) {
            data.train = to_binary_label_regression(std::move(data.train));
            data.test = to_binary_label_regression(std::move(data.test));
        }
        report.timings.data_s += seconds_since(t0);

        const RepetitionOutcome outcome =
            run_one_repetition(rep_plan, data.train, data.test, report.timings);
        report.privileged.per_repetition.push_back(outcome.privileged);
        report.input.per_repetition.push_back(outcome.input);
        report.lupi.per_repetition.push_back(outcome.lupi);
    }
    finalize_aggregates(report.privileged);
    finalize_aggregates(report.input);
    finalize_aggregates(report.lupi);
    return report;
}

ExperimentReport run_mnist(const ExperimentPlan& plan) {
    ExperimentReport report;
    report.plan = plan;

    auto t0 = clock::now();
    auto [train_images, train_labels] = load_idx(plan.idx_train_images, plan.idx_train_labels);
    auto [test_images, test_labels] = load_idx(plan.idx_test_images, plan.idx_test_labels);

    double max_label = 0.0;
    for (double l : train_labels) max_label = std::max(max_label, l);
    for (double l : test_labels) max_label = std::max(max_label, l);
    const std::size_t classes = static_cast<std::size_t>(max_label) + 1;

    LupiDataset train_full;
    train_full.task = TaskKind::classification;
    train_full.X = downscale_4x4(train_images);
    train_full.X_star = std::move(train_images);
    train_full.y = one_hot(train_labels, classes);

    LupiDataset test;
    test.task = TaskKind::classification;
    test.X = downscale_4x4(test_images);
    test.X_star = std::move(test_images);
    test.y = one_hot(test_labels, classes);
    report.timings.data_s += seconds_since(t0);

    for (std::size_t rep = 0; rep < plan.repetitions; ++rep) {
        ExperimentPlan rep_plan = plan;
        rep_plan.base_seed = plan.base_seed + rep;

        t0 = clock::now();
        const LupiDataset train = subsample(train_full, plan.train_n, rep_plan.base_seed);
        report.timings.data_s += seconds_since(t0);

        const RepetitionOutcome outcome =
            run_one_repetition(rep_plan, train, test, report.timings);
        report.privileged.per_repetition.push_back(outcome.privileged);
        report.input.per_repetition.push_back(outcome.input);
        report.lupi.per_repetition.push_back(outcome.lupi);
    }
    finalize_aggregates(report.privileged);
    finalize_aggregates(report.input);
    finalize_aggregates(report.lupi);
    return report;
}

LupiDataset gather_dataset(const LupiDataset& source, std::span<const std::size_t> rows) {
    LupiDataset out;
    out.task = source.task;
    out.X = source.X.gather_rows(rows);
    out.X_star = source.X_star.gather_rows(rows);
    out.y = source.y.gather_rows(rows);
    return out;
}

MetricReport pooled_tabular_metrics(const Vector& targets, const Vector& predictions,
                                    std::optional<double> cutoff) {
    MetricReport report;
    report.rmse = rmse(targets, predictions);
    try {
        report.spearman = spearman(targets, predictions);
    } catch (const UndefinedMetricError&) {
    }
    if (cutoff) {
        // Positive class: target below the cutoff (stronger affinity), so the
        // score for ranking positives is the negated prediction.
        Vector labels(targets.size());
        Vector scores(predictions.size());
        for (std::size_t i = 0; i < targets.size(); ++i) {
            labels[i] = targets[i] < *cutoff ? 1.0 : 0.0;
            scores[i] = -predictions[i];
        }
        try {
            report.auc_roc = auc_roc(labels, scores);
        } catch (const UndefinedMetricError&) {
        }
        try {
            report.auc_pr = auc_pr(labels, scores);
        } catch (const UndefinedMetricError&) {
        }
    }
    return report;
}

ExperimentReport run_tabular(const ExperimentPlan& plan) {
    ExperimentReport report;
    report.plan = plan;

    auto t0 = clock::now();
    const TabularData tab = load_tabular(plan.csv_path);
    const CvSplit split = loocv_splits(tab.groups);
    report.timings.data_s += seconds_since(t0);

    const std::size_t n = tab.dataset.rows();
    Vector pooled_teacher(n), pooled_input(n), pooled_lupi(n);

    for (std::size_t f = 0; f < split.folds.size(); ++f) {
        const CvFold& fold = split.folds[f];
        ExperimentPlan fold_plan = plan;
        fold_plan.base_seed = plan.base_seed + f;

        const LupiDataset train = gather_dataset(tab.dataset, fold.train_rows);

        t0 = clock::now();
        const Model teacher = train_teacher(fold_plan, train);
        report.timings.teacher_s += seconds_since(t0);
        t0 = clock::now();
        const Model input_model = train_input_model(fold_plan, train);
        report.timings.input_s += seconds_since(t0);
        t0 = clock::now();
        const Model lupi_model = plan.loss == LossMode::plain
                                     ? input_model
                                     : train_student_lupi(fold_plan, train, teacher);
        report.timings.lupi_s += seconds_since(t0);

        t0 = clock::now();
        const Tensor2D test_x = tab.dataset.X.gather_rows(fold.test_rows);
        const Tensor2D test_xs = tab.dataset.X_star.gather_rows(fold.test_rows);
        const Tensor2D from_teacher = forward(teacher, test_xs);
        const Tensor2D from_input = forward(input_model, test_x);
        const Tensor2D from_lupi = forward(lupi_model, test_x);
        for (std::size_t i = 0; i < fold.test_rows.size(); ++i) {
            pooled_teacher[fold.test_rows[i]] = from_teacher(i, 0);
            pooled_input[fold.test_rows[i]] = from_input(i, 0);
            pooled_lupi[fold.test_rows[i]] = from_lupi(i, 0);
        }
        report.timings.eval_s += seconds_since(t0);
    }

    const Vector targets = first_column(tab.dataset.y);
    report.privileged.per_repetition.push_back(
        pooled_tabular_metrics(targets, pooled_teacher, plan.affinity_cutoff));
    report.input.per_repetition.push_back(
        pooled_tabular_metrics(targets, pooled_input, plan.affinity_cutoff));
    report.lupi.per_repetition.push_back(
        pooled_tabular_metrics(targets, pooled_lupi, plan.affinity_cutoff));
    finalize_aggregates(report.privileged);
    finalize_aggregates(report.input);
    finalize_aggregates(report.lupi);
    return report;
}

} // namespace

ExperimentReport run_experiment(const ExperimentPlan& plan) {
    plan.validate();
    switch (plan.experiment) {
    case ExperimentKind::synthetic: return run_synthetic(plan);
    case ExperimentKind::mnist: return run_mnist(plan);
    case ExperimentKind::tabular: return run_tabular(plan);
    }
    throw ConfigError("run_experiment: unknown experiment kind");
}

std::vector<std::pair<double, ExperimentReport>> t_sweep(const ExperimentPlan& plan,
                                                         const std::vector<double>& t_values) {
    if (plan.loss != LossMode::meta_eq2)
        throw UnsupportedModeError("t_sweep: only the eq2 meta-loss mode sweeps T");
    for (double t : t_values)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw DomainError("t_sweep: every T must be finite and >= 0");

    std::vector<std::pair<double, ExperimentReport>> out;
    out.reserve(t_values.size());
    for (double t : t_values) {
        ExperimentPlan swept = plan;
        swept.meta.temperature_T = t; // base_seed shared, so data is identical across T
        out.emplace_back(t, run_experiment(swept));
    }
    return out;
}

namespace {

const char* metric_names[] = {"accuracy", "rmse", "spearman", "auc_roc", "auc_pr"};

ordered_json plan_to_json(const ExperimentPlan& plan) {
    ordered_json j;
    j["experiment"] = to_string(plan.experiment);
    j["loss"] = to_string(plan.loss);
    j["repetitions"] = plan.repetitions;
    j["base_seed"] = plan.base_seed;
    j["temperature_T"] = plan.meta.temperature_T;
    if (plan.meta.per_example_T) j["per_example_T"] = *plan.meta.per_example_T;
    j["lambda"] = plan.distill.lambda;
    j["distill_T"] = plan.distill.temperature_T;
    j["learning_rate"] = plan.train.learning_rate;
    j["epochs"] = plan.train.epochs;
    j["batch_size"] = plan.train.batch_size;
    j["hidden"] = plan.hidden;
    j["scenario"] = to_string(plan.synth.scenario);
    j["task"] = to_string(plan.synth.task);
    j["binary_label_regression"] = plan.binary_label_regression;
    j["n_train"] = plan.synth.n_train;
    j["n_test"] = plan.synth.n_test;
    j["d"] = plan.synth.d;
    j["d_star"] = plan.synth.d_star;
    j["train_n"] = plan.train_n;
    j["idx_train_images"] = plan.idx_train_images;
    j["idx_train_labels"] = plan.idx_train_labels;
    j["idx_test_images"] = plan.idx_test_images;
    j["idx_test_labels"] = plan.idx_test_labels;
    j["csv_path"] = plan.csv_path;
    if (plan.affinity_cutoff)
        j["affinity_cutoff"] = *plan.affinity_cutoff;
    else
        j["affinity_cutoff"] = nullptr;
    return j;
}

ordered_json metric_report_to_json(const MetricReport& report) {
    ordered_json j = ordered_json::object();
    for (const auto& [name, field] : kMetricFields)
        if (report.*field) j[name] = *(report.*field);
    return j;
}

ordered_json model_results_to_json(const ModelResults& results) {
    ordered_json j;
    j["per_repetition"] = ordered_json::array();
    for (const MetricReport& rep : results.per_repetition)
        j["per_repetition"].push_back(metric_report_to_json(rep));
    ordered_json aggs = ordered_json::object();
    for (const char* name : metric_names) {
        auto it = results.aggregates.find(name);
        if (it == results.aggregates.end()) continue;
        aggs[name] = {{"mean", it->second.mean},
                      {"std", it->second.std_dev},
                      {"n_runs", it->second.n_runs}};
    }
    j["aggregates"] = aggs;
    return j;
}

ModelResults model_results_from_json(const ordered_json& j) {
    ModelResults results;
    for (const auto& rep : j.at("per_repetition")) {
        MetricReport report;
        for (const auto& [name, field] : kMetricFields)
            if (rep.contains(name)) report.*field = rep.at(name).get<double>();
        results.per_repetition.push_back(report);
    }
    for (const auto& [name, agg] : j.at("aggregates").items()) {
        Aggregate a;
        a.mean = agg.at("mean").get<double>();
        a.std_dev = agg.at("std").get<double>();
        a.n_runs = agg.at("n_runs").get<std::size_t>();
        results.aggregates[name] = a;
    }
    return results;
}

template <typename Enum>
Enum enum_from_string(const std::string& text, std::initializer_list<Enum> values,
                      const char* what) {
    for (Enum v : values)
        if (text == to_string(v)) return v;
    throw ParseError(std::string(what) + ": unknown value '" + text + "'");
}

ExperimentPlan plan_from_json(const ordered_json& j) {
    ExperimentPlan plan;
    plan.experiment = enum_from_string<ExperimentKind>(
        j.at("experiment"),
        {ExperimentKind::synthetic, ExperimentKind::mnist, ExperimentKind::tabular},
        "experiment");
    plan.loss = enum_from_string<LossMode>(
        j.at("loss"), {LossMode::plain, LossMode::distill_eq1, LossMode::meta_eq2}, "loss");
    plan.repetitions = j.at("repetitions").get<std::size_t>();
    plan.base_seed = j.at("base_seed").get<std::uint64_t>();
    plan.meta.temperature_T = j.at("temperature_T").get<double>();
    if (j.contains("per_example_T")) plan.meta.per_example_T = j.at("per_example_T").get<Vector>();
    plan.distill.lambda = j.at("lambda").get<double>();
    plan.distill.temperature_T = j.at("distill_T").get<double>();
    plan.train.learning_rate = j.at("learning_rate").get<double>();
    plan.train.epochs = j.at("epochs").get<std::size_t>();
    plan.train.batch_size = j.at("batch_size").get<std::size_t>();
    plan.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    plan.synth.scenario = enum_from_string<Scenario>(
        j.at("scenario"),
        {Scenario::clean_labels, Scenario::clean_features, Scenario::relevant_features,
         Scenario::sample_dependent},
        "scenario");
    plan.synth.task = enum_from_string<TaskKind>(
        j.at("task"), {TaskKind::classification, TaskKind::regression}, "task");
    plan.binary_label_regression = j.at("binary_label_regression").get<bool>();
    plan.synth.n_train = j.at("n_train").get<std::size_t>();
    plan.synth.n_test = j.at("n_test").get<std::size_t>();
    plan.synth.d = j.at("d").get<std::size_t>();
    plan.synth.d_star = j.at("d_star").get<std::size_t>();
    plan.train_n = j.at("train_n").get<std::size_t>();
    plan.idx_train_images = j.at("idx_train_images").get<std::string>();
    plan.idx_train_labels = j.at("idx_train_labels").get<std::string>();
    plan.idx_test_images = j.at("idx_test_images").get<std::string>();
    plan.idx_test_labels = j.at("idx_test_labels").get<std::string>();
    plan.csv_path = j.at("csv_path").get<std::string>();
    if (!j.at("affinity_cutoff").is_null())
        plan.affinity_cutoff = j.at("affinity_cutoff").get<double>();
    return plan;
}

ordered_json report_to_json_object(const ExperimentReport& report) {
    ordered_json j;
    j["schema_version"] = 1;
    j["plan"] = plan_to_json(report.plan);
    ordered_json results;
    results["privileged"] = model_results_to_json(report.privileged);
    results["input"] = model_results_to_json(report.input);
    results["lupi"] = model_results_to_json(report.lupi);
    j["results"] = results;
    return j;
}

} // namespace

std::string report_to_json(const ExperimentReport& report) {
    return report_to_json_object(report).dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& json_text) {
    const ordered_json j = ordered_json::parse(json_text);
    if (j.at("schema_version").get<int>() != 1)
        throw ParseError("report_from_json: unsupported schema_version");
    ExperimentReport report;
    report.plan = plan_from_json(j.at("plan"));
    report.privileged = model_results_from_json(j.at("results").at("privileged"));
    report.input = model_results_from_json(j.at("results").at("input"));
    report.lupi = model_results_from_json(j.at("results").at("lupi"));
    return report;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void csv_rows_for_model(std::ostream& out, const char* model, const ModelResults& results,
                        std::size_t reps) {
    for (const char* name : metric_names) {
        auto it = results.aggregates.find(name);
        if (it == results.aggregates.end()) continue;
        out << model << ',' << name << ',' << format_double(it->second.mean) << ','
            << format_double(it->second.std_dev) << ',' << it->second.n_runs;
        for (std::size_t r = 0; r < reps; ++r) {
            out << ',';
            const MetricReport& rep = results.per_repetition[r];
            for (const auto& [field_name, field] : kMetricFields) {
                if (std::string_view(field_name) != name) continue;
                if (rep.*field) out << format_double(*(rep.*field));
            }
        }
        out << '\n';
    }
}

} // namespace

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    const std::size_t reps = report.privileged.per_repetition.size();
    out << "model,metric,mean,std,n_runs";
    for (std::size_t r = 0; r < reps; ++r) out << ",rep_" << r;
    out << '\n';
    csv_rows_for_model(out, "privileged", report.privileged, reps);
    csv_rows_for_model(out, "input", report.input, reps);
    csv_rows_for_model(out, "lupi", report.lupi, reps);
    return out.str();
}

std::string sweep_to_csv(const std::vector<std::pair<double, ExperimentReport>>& sweep) {
    std::ostringstream out;
    out << "T,model,metric,mean,std\n";
    for (const auto& [t, report] : sweep) {
        const std::pair<const char*, const ModelResults*> models[] = {
            {"privileged", &report.privileged},
            {"input", &report.input},
            {"lupi", &report.lupi},
        };
        for (const auto& [model, results] : models) {
            for (const char* name : metric_names) {
                auto it = results->aggregates.find(name);
                if (it == results->aggregates.end()) continue;
                out << format_double(t) << ',' << model << ',' << name << ','
                    << format_double(it->second.mean) << ',' << format_double(it->second.std_dev)
                    << '\n';
            }
        }
    }
    return out.str();
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << (format == ReportFormat::json ? report_to_json(report) : report_to_csv(report));
    if (!out) throw IoError("short write to " + path);
}

const char* to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::synthetic: return "synthetic";
    case ExperimentKind::mnist: return "mnist";
    case ExperimentKind::tabular: return "tabular";
    }
    return "?";
}

const char* to_string(LossMode mode) {
    switch (mode) {
    case LossMode::plain: return "plain";
    case LossMode::distill_eq1: return "eq1";
    case LossMode::meta_eq2: return "eq2";
    }
    return "?";
}

const char* to_string(Scenario scenario) {
    switch (scenario) {
    case Scenario::clean_labels: return "clean_labels";
    case Scenario::clean_features: return "clean_features";
    case Scenario::relevant_features: return "relevant_features";
    case Scenario::sample_dependent: return "sample_dependent";
    }
    return "?";
}

const char* to_string(TaskKind task) {
    return task == TaskKind::classification ? "classification" : "regression";
}

const char* to_string(BaseLossKind kind) {
    switch (kind) {
    case BaseLossKind::mse: return "mse";
    case BaseLossKind::bce: return "bce";
    case BaseLossKind::cross_entropy: return "cross_entropy";
    }
    return "?";
}

} // namespace lupi
