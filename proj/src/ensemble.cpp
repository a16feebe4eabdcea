#include "heartstack/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "heartstack/error.hpp"

namespace heartstack {

void StackingConfig::validate() const {
  if (candidate_specs.empty()) fail(ErrorCategory::config, "stacking needs at least one candidate");
  if (top_n == 0 || top_n > candidate_specs.size()) {
    fail(ErrorCategory::config, "top_n must be between 1 and the number of candidates (" +
                                    std::to_string(candidate_specs.size()) + ")");
  }
  if (oof_folds < 2) fail(ErrorCategory::config, "oof_folds must be at least 2");
  for (const auto& c : candidate_specs) c.validate();
  meta_spec.validate();
}

json to_json(const StackingConfig& config) {
  json candidates = json::array();
  for (const auto& c : config.candidate_specs) candidates.push_back(to_json(c));
  return json{{"candidates", candidates},
              {"top_n", config.top_n},
              {"meta", to_json(config.meta_spec)},
              {"oof_folds", config.oof_folds},
              {"seed", config.seed}};
}

StackingConfig stacking_config_from_json(const json& j) {
  StackingConfig config;
  for (const auto& c : j.at("candidates")) config.candidate_specs.push_back(spec_from_json(c));
  if (j.contains("top_n")) config.top_n = j.at("top_n").get<std::size_t>();
  if (j.contains("meta")) config.meta_spec = spec_from_json(j.at("meta"));
  if (j.contains("oof_folds")) config.oof_folds = j.at("oof_folds").get<std::size_t>();
  if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

BaseSelectionReport select_base_learners(std::vector<CandidateScore> candidates, std::size_t top_n) {
  if (top_n == 0 || candidates.size() < top_n) {
    fail(ErrorCategory::config, "cannot select " + std::to_string(top_n) + " bases from " +
                                    std::to_string(candidates.size()) + " candidates");
  }
  BaseSelectionReport report;
  report.candidates = std::move(candidates);
  std::vector<std::size_t> order(report.candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.candidates[a].mean_accuracy > report.candidates[b].mean_accuracy;
  });
  report.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_n));
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    if (std::find(report.selected.begin(), report.selected.end(), i) == report.selected.end()) {
      report.rejected.push_back(i);
    }
  }
  return report;
}

json to_json(const BaseSelectionReport& report) {
  json candidates = json::array();
  for (const auto& c : report.candidates) {
    candidates.push_back(json{{"spec", to_json(c.spec)},
                              {"mean_cv_accuracy", c.mean_accuracy},
                              {"fold_accuracy", c.fold_accuracy}});
  }
  return json{{"candidates", candidates}, {"selected", report.selected}, {"rejected", report.rejected}};
}

BaseSelectionReport selection_from_json(const json& j) {
  BaseSelectionReport report;
  for (const auto& c : j.at("candidates")) {
    report.candidates.push_back(CandidateScore{spec_from_json(c.at("spec")), c.at("mean_cv_accuracy").get<double>(),
                                               c.at("fold_accuracy").get<std::vector<double>>()});
  }
  report.selected = j.at("selected").get<std::vector<std::size_t>>();
  report.rejected = j.at("rejected").get<std::vector<std::size_t>>();
  for (auto i : report.selected) {
    if (i >= report.candidates.size()) fail(ErrorCategory::model, "selection index out of range");
  }
  return report;
}

StackedModel::StackedModel(std::vector<TrainedModel> bases, TrainedModel meta, BaseSelectionReport selection,
                           FoldPlan plan)
    : bases_(std::move(bases)), meta_(std::move(meta)), selection_(std::move(selection)), plan_(std::move(plan)) {
  if (bases_.empty()) fail(ErrorCategory::model, "stacked model needs at least one base");
  if (meta_.n_features() != bases_.size()) {
    fail(ErrorCategory::model, "meta model width does not match the number of bases");
  }
  for (const auto& b : bases_) {
    if (b.n_features() != bases_.front().n_features()) {
      fail(ErrorCategory::model, "base models disagree on the feature count");
    }
  }
}

std::vector<double> StackedModel::meta_features(std::span<const double> row) const {
  std::vector<double> z(bases_.size());
  for (std::size_t b = 0; b < bases_.size(); ++b) z[b] = bases_[b].predict_proba(row);
  return z;
}

double StackedModel::predict_proba(std::span<const double> row) const {
  return meta_.predict_proba(meta_features(row));
}

std::vector<double> StackedModel::predict_proba(const Matrix& rows) const {
  std::vector<double> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict_proba(rows.row(i));
  return out;
}

std::vector<int> StackedModel::predict(const Matrix& rows) const {
  std::vector<int> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict(rows.row(i));
  return out;
}

StackedModel fit_stack(const StackingConfig& config, const Matrix& x, std::span<const int> y, StackTrace* trace) {
  config.validate();
  const FoldPlan plan = k_fold_plan(x.rows(), config.oof_folds, config.seed, y);
  std::vector<CvResult> cv;
  for (const auto& spec : config.candidate_specs) {
    cv.push_back(cross_validate([&spec](const Matrix& xs, std::span<const int> ys) { return fit(spec, xs, ys); },
                                x, y, plan));
  }
  return fit_stack_from_cv(config, x, y, plan, cv, trace);
}

StackedModel fit_stack_from_cv(const StackingConfig& config, const Matrix& x, std::span<const int> y,
                               const FoldPlan& plan, std::span<const CvResult> cv, StackTrace* trace) {
  config.validate();
  if (cv.size() != config.candidate_specs.size()) {
    fail(ErrorCategory::config, "one cross-validation result is needed per candidate");
  }
  if (plan.assignments.size() != x.rows() || y.size() != x.rows()) {
    fail(ErrorCategory::data, "fold plan, features and labels disagree on the row count");
  }
  for (const auto& r : cv) {
    if (r.oof_proba.size() != x.rows() || r.oof_source_fold.size() != x.rows()) {
      fail(ErrorCategory::data, "cross-validation result does not cover every training row");
    }
  }

  std::vector<CandidateScore> scores;
  for (std::size_t c = 0; c < cv.size(); ++c) {
    scores.push_back({config.candidate_specs[c], cv[c].mean_accuracy, cv[c].fold_accuracy});
  }
  BaseSelectionReport selection = select_base_learners(std::move(scores), config.top_n);

  Matrix meta_x(x.rows(), selection.selected.size());
  for (std::size_t b = 0; b < selection.selected.size(); ++b) {
    const auto& oof = cv[selection.selected[b]].oof_proba;
    for (std::size_t i = 0; i < x.rows(); ++i) meta_x(i, b) = oof[i];
  }
  TrainedModel meta = fit(config.meta_spec, meta_x, y);

  std::vector<TrainedModel> bases;
  for (auto idx : selection.selected) bases.push_back(fit(selection.candidates[idx].spec, x, y));

  if (trace != nullptr) {
    trace->meta_features = meta_x;
    trace->oof_source_fold.clear();
    for (auto idx : selection.selected) trace->oof_source_fold.push_back(cv[idx].oof_source_fold);
  }
  return StackedModel(std::move(bases), std::move(meta), std::move(selection), plan);
}

StackedModel fit_stack(const StackingConfig& config, const Dataset& train, StackTrace* trace) {
  return fit_stack(config, train.features, train.target, trace);
}

}  // namespace heartstack
