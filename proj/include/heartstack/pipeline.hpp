#pragma once

// The end-to-end workflow behind the command-line tool: analysis, baseline
// comparison, stack training, evaluation and scoring. Each step writes its
// files under a fixed layout inside the output directory:
//
//   analysis/   validation, cleaning, summary and correlation reports
//   baseline/   tuned candidates, CV and test accuracies
//   models/     stack.model and the base selection report
//   evaluation/ per-model metrics, ROC and PR curves, literature table

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "heartstack/data.hpp"
#include "heartstack/ensemble.hpp"
#include "heartstack/learners.hpp"
#include "heartstack/metrics.hpp"
#include "heartstack/model_store.hpp"

namespace heartstack {

namespace fs = std::filesystem;

struct CandidateConfig {
  LearnerSpec spec;
  Grid grid;  // empty: the learner spec is cross-validated as is
};

struct PipelineConfig {
  fs::path dataset = "data/heart.csv";
  CleaningStrategy cleaning = CleaningStrategy::iqr(1.5);
  double split_fraction = 0.8;
  std::uint64_t seed = 42;
  std::size_t folds = 10;
  std::vector<CandidateConfig> candidates;
  std::size_t top_n = 4;
  LearnerSpec meta_spec{Algorithm::sgd_logistic, {}, 42};
  fs::path output_dir = "out";

  /// Throws Error(config) on the first invalid field.
  void validate() const;
  /// Sets the pipeline seed and every learner seed.
  void set_seed(std::uint64_t s);
  StackingConfig stacking(std::vector<LearnerSpec> candidate_specs) const;

  static PipelineConfig paper_defaults();
};

json to_json(const PipelineConfig& config);
/// Missing keys keep their paper-default values.
PipelineConfig pipeline_config_from_json(const json& j);
/// "paper-defaults" names the built-in configuration; anything else is a
/// JSON file path.
PipelineConfig load_pipeline_config(const std::string& name_or_path);

struct PreparedData {
  Dataset raw;
  ValidationReport validation;
  CleanResult cleaned;
  SplitPair split;
};

/// Parse, validate, clean and split according to the config.
PreparedData prepare_data(const PipelineConfig& config);

// ---------------------------------------------------------------------------

struct TunedCandidate {
  LearnerSpec spec;  // best grid point, or the configured spec
  CvResult cv;       // on the shared training-split fold plan
  std::optional<GridSearchResult> grid;
};

/// Grid search (or plain CV) for every candidate on the training split, all
/// on one stratified fold plan.
std::vector<TunedCandidate> tune_candidates(const PipelineConfig& config, const Dataset& train);

struct BaselineRow {
  TunedCandidate tuned;
  double test_accuracy = 0.0;
};

struct BaselineResult {
  std::vector<BaselineRow> rows;  // sorted by test accuracy, descending; ties keep declaration order
  const BaselineRow* find(Algorithm a) const;
};

struct TrainResult {
  StackedModel model;
  fs::path model_path;
};

struct ModelEvaluation {
  std::string name;
  ConfusionMatrix confusion;
  MetricReport metrics;
  RocCurve roc;
  PrCurve pr;
};

struct EvaluationResult {
  std::vector<ModelEvaluation> models;  // "stacked" first, then each base
};

/// The published comparison table, reproduced verbatim for context.
struct LiteratureEntry {
  int number;
  const char* authors;
  const char* approach;
  const char* dataset;
  const char* accuracy;
};
const std::vector<LiteratureEntry>& literature_table();

void cmd_analyze(const PipelineConfig& config);
BaselineResult cmd_baseline(const PipelineConfig& config, const PreparedData* data = nullptr,
                            std::vector<TunedCandidate>* tuned_out = nullptr);
TrainResult cmd_train(const PipelineConfig& config, const PreparedData* data = nullptr,
                      const std::vector<TunedCandidate>* tuned = nullptr);
EvaluationResult cmd_evaluate(const PipelineConfig& config, const fs::path& model_path,
                              const PreparedData* data = nullptr);
/// Writes predictions.csv (row, probability, label) to `output`; when the
/// input carries a target, also writes a metrics report beside it.
void cmd_predict(const fs::path& model_path, const fs::path& input, const fs::path& output);

struct RunSummary {
  std::uint64_t seed = 0;
  double stacked_test_accuracy = 0.0;
  double best_base_test_accuracy = 0.0;
  std::string best_base;
};

/// analyze, baseline, train and evaluate in one process.
RunSummary cmd_run(const PipelineConfig& config);
/// Baseline, train and evaluate for seeds s, s+1, ..., each under
/// <out>/seeds/seed_<s>/, plus <out>/seed_sweep.csv with mean and std.
std::vector<RunSummary> cmd_seed_sweep(const PipelineConfig& config, std::size_t count);

}  // namespace heartstack
