#pragma once

// Two-level stacked generalization: candidates are cross-validated on one
// shared fold plan, the best top_n are kept, their out-of-fold class-1
// probabilities train the meta-level classifier, and the kept bases are
// refitted on the full training set.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heartstack/learners.hpp"

namespace heartstack {

struct StackingConfig {
  std::vector<LearnerSpec> candidate_specs;
  std::size_t top_n = 4;
  LearnerSpec meta_spec{Algorithm::sgd_logistic, {}, 42};
  std::size_t oof_folds = 10;
  std::uint64_t seed = 42;

  void validate() const;
};

json to_json(const StackingConfig& config);
StackingConfig stacking_config_from_json(const json& j);

struct CandidateScore {
  LearnerSpec spec;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct BaseSelectionReport {
  std::vector<CandidateScore> candidates;  // declaration order
  std::vector<std::size_t> selected;       // indices into candidates, best first
  std::vector<std::size_t> rejected;       // declaration order
};

/// Keeps the top_n candidates by mean accuracy; ties keep declaration order.
BaseSelectionReport select_base_learners(std::vector<CandidateScore> candidates, std::size_t top_n);

json to_json(const BaseSelectionReport& report);
BaseSelectionReport selection_from_json(const json& j);

/// Diagnostics from fitting, not persisted with the model.
struct StackTrace {
  Matrix meta_features;                             // rows x top_n, OOF probabilities
  std::vector<std::vector<std::size_t>> oof_source_fold;  // per selected base, per row
};

class StackedModel {
 public:
  StackedModel(std::vector<TrainedModel> bases, TrainedModel meta, BaseSelectionReport selection, FoldPlan plan);

  const std::vector<TrainedModel>& bases() const { return bases_; }
  const TrainedModel& meta() const { return meta_; }
  const BaseSelectionReport& selection() const { return selection_; }
  const FoldPlan& fold_plan() const { return plan_; }

  /// One class-1 probability per base, in selection order.
  std::vector<double> meta_features(std::span<const double> row) const;
  double predict_proba(std::span<const double> row) const;
  int predict(std::span<const double> row) const { return label_for(predict_proba(row)); }
  std::vector<double> predict_proba(const Matrix& rows) const;
  std::vector<int> predict(const Matrix& rows) const;

 private:
  std::vector<TrainedModel> bases_;
  TrainedModel meta_;
  BaseSelectionReport selection_;
  FoldPlan plan_;
};

StackedModel fit_stack(const StackingConfig& config, const Matrix& x, std::span<const int> y,
                       StackTrace* trace = nullptr);
StackedModel fit_stack(const StackingConfig& config, const Dataset& train, StackTrace* trace = nullptr);

/// fit_stack with the candidates' cross-validation already run on `plan`
/// (one CvResult per candidate, in order). Produces the same model as
/// fit_stack when `plan` is the plan fit_stack would draw.
StackedModel fit_stack_from_cv(const StackingConfig& config, const Matrix& x, std::span<const int> y,
                               const FoldPlan& plan, std::span<const CvResult> cv, StackTrace* trace = nullptr);

}  // namespace heartstack
