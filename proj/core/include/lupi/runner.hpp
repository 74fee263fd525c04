#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lupi/dataio.hpp"
#include "lupi/losses.hpp"
#include "lupi/metrics.hpp"
#include "lupi/nn.hpp"
#include "lupi/synth.hpp"

namespace lupi {

enum class ExperimentKind { synthetic, mnist, tabular };

enum class LossMode { plain, distill_eq1, meta_eq2 };

enum class ReportFormat { json, csv };

struct ExperimentPlan {
    ExperimentKind experiment = ExperimentKind::synthetic;

    SynthConfig synth;                        // synthetic + sweep
    bool binary_label_regression = false;     // regression over 0/1 labels (synthetic)

    LossMode loss = LossMode::meta_eq2;
    MetaLossConfig meta;
    DistillConfig distill;
    TrainConfig train;

    std::size_t repetitions = 10;
    std::uint64_t base_seed = 1;

    /// Hidden layer widths for teacher/students. Empty means the per-mode
    /// default: none for synthetic, {16, 32} relu for mnist, one linear layer
    /// as wide as the respective feature space for tabular.
    std::vector<std::size_t> hidden;

    // mnist
    std::string idx_train_images, idx_train_labels;
    std::string idx_test_images, idx_test_labels;
    std::size_t train_n = 500;

    // tabular
    std::string csv_path;
    std::optional<double> affinity_cutoff; // binarization threshold for AUC metrics

    void validate() const;
};

struct ModelResults {
    std::vector<MetricReport> per_repetition;
    std::map<std::string, Aggregate> aggregates; // keyed by metric name
};

struct PhaseTimings {
    double data_s = 0.0;
    double teacher_s = 0.0;
    double input_s = 0.0;
    double lupi_s = 0.0;
    double eval_s = 0.0;
};

struct ExperimentReport {
    ExperimentPlan plan;
    ModelResults privileged; // teacher evaluated on privileged test features
    ModelResults input;      // plain student on input features
    ModelResults lupi;       // LUPI student on input features
    PhaseTimings timings;    // console diagnostics; never serialized
};

/// Metrics for one model's test predictions: accuracy plus binary AUCs for
/// classification (argmax accuracy when one-hot), rmse and spearman for
/// regression. Undefined metrics come back absent.
MetricReport evaluate_predictions(TaskKind task, const Tensor2D& targets,
                                  const Tensor2D& predictions);

/// Teacher trained on (X_star, y) with the plain base loss.
Model train_teacher(const ExperimentPlan& plan, const LupiDataset& train);

/// Plain student trained on (X, y); identical to the LUPI student except for
/// the loss.
Model train_input_model(const ExperimentPlan& plan, const LupiDataset& train);

/// LUPI student trained on X against the teacher's cached outputs under
/// meta_eq2 or distill_eq1.
Model train_student_lupi(const ExperimentPlan& plan, const LupiDataset& train,
                         const Model& teacher);

ExperimentReport run_experiment(const ExperimentPlan& plan);

/// One run_experiment per T, all sharing plan.base_seed so the data and the
/// teacher/input rows are identical across the sweep.
std::vector<std::pair<double, ExperimentReport>> t_sweep(const ExperimentPlan& plan,
                                                         const std::vector<double>& t_values);

/// Canonical serializations. JSON is byte-stable for identical plans; wall
/// clock timings are deliberately excluded.
std::string report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);
std::string sweep_to_csv(const std::vector<std::pair<double, ExperimentReport>>& sweep);

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

/// Parses back what report_to_json wrote (metrics and aggregates; the plan
/// echo is compared textually).
ExperimentReport report_from_json(const std::string& json_text);

const char* to_string(ExperimentKind kind);
const char* to_string(LossMode mode);
const char* to_string(Scenario scenario);
const char* to_string(TaskKind task);
const char* to_string(BaseLossKind kind);

} // namespace lupi
