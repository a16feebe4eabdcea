#pragma once

// The ten baseline classifiers (plus a constant baseline), their
// hyperparameter tables, fitting and prediction, k-fold cross-validation and
// grid search.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "heartstack/data.hpp"
#include "heartstack/matrix.hpp"

namespace heartstack {

using json = nlohmann::json;

enum class Algorithm {
  cart,
  random_forest,
  extra_trees,
  gbm,
  xgb_style,
  adaboost,
  knn,
  naive_bayes,
  sgd_logistic,
  linear_svc,
  mlp,
  constant,  // always predicts one class; a floor for comparisons and tests
};

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

/// The ten baseline algorithms in declaration order (tie-breaking order).
const std::vector<Algorithm>& baseline_algorithms();

/// Distance, linear and neural learners see z-scored features.
bool needs_standardization(Algorithm a);

using ParamValue = std::variant<double, std::string>;
using Hyperparams = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& v);
json to_json(const ParamValue& v);
ParamValue param_from_json(const json& j);

struct ParamDef {
  std::string name;
  ParamValue default_value;
  double min = 0.0;  // numeric bounds, inclusive
  double max = 0.0;
  bool integer = false;
  std::vector<std::string> choices;  // non-empty for string parameters
};

const std::vector<ParamDef>& param_defs(Algorithm a);

struct LearnerSpec {
  Algorithm algorithm = Algorithm::cart;
  Hyperparams hyperparameters;  // overrides; missing names take defaults
  std::uint64_t seed = 42;

  bool needs_standardization() const { return heartstack::needs_standardization(algorithm); }

  /// Validates names, types and ranges; throws Error(config).
  void validate() const;
  /// Overrides merged over defaults, validated.
  Hyperparams resolved() const;
  double number(const std::string& name) const;
  std::string text(const std::string& name) const;

  friend bool operator==(const LearnerSpec&, const LearnerSpec&) = default;
};

json to_json(const LearnerSpec& spec);
LearnerSpec spec_from_json(const json& j);

// ---------------------------------------------------------------------------

/// Fitted scorer for one algorithm. Inputs are already standardized when the
/// algorithm requires it.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double predict_proba(std::span<const double> row) const = 0;
  virtual json to_json() const = 0;
  /// Smallest row width the classifier can score (largest feature index + 1).
  virtual std::size_t required_width() const = 0;
};

/// Rebuilds the classifier for `algorithm` from its to_json() payload.
std::shared_ptr<const Classifier> classifier_from_json(Algorithm algorithm, const json& payload);

/// Immutable fitted predictor: spec + optional standardizer + classifier.
class TrainedModel {
 public:
  TrainedModel(LearnerSpec spec, std::optional<Standardizer> standardizer,
               std::shared_ptr<const Classifier> classifier, std::size_t n_features);

  const LearnerSpec& spec() const { return spec_; }
  const std::optional<Standardizer>& standardizer() const { return standardizer_; }
  const Classifier& classifier() const { return *classifier_; }
  std::size_t n_features() const { return n_features_; }

  /// Class-1 probability in [0, 1].
  double predict_proba(std::span<const double> row) const;
  /// 1 iff predict_proba(row) >= 0.5.
  int predict(std::span<const double> row) const;

  std::vector<double> predict_proba(const Matrix& rows) const;
  std::vector<int> predict(const Matrix& rows) const;

 private:
  LearnerSpec spec_;
  std::optional<Standardizer> standardizer_;
  std::shared_ptr<const Classifier> classifier_;
  std::size_t n_features_ = 0;
};

inline int label_for(double probability) { return probability >= 0.5 ? 1 : 0; }

/// Fits `spec` on (x, y). Requires both classes and valid hyperparameters.
TrainedModel fit(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
TrainedModel fit(const LearnerSpec& spec, const Dataset& train);

double accuracy(std::span<const int> truth, std::span<const int> predicted);

// ---------------------------------------------------------------------------

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // row -> fold
  std::uint64_t seed = 0;
  bool stratified = false;

  std::vector<std::size_t> fold_sizes() const;
  /// Rows outside `fold`, ascending.
  std::vector<std::size_t> training_rows(std::size_t fold) const;
  /// Rows inside `fold`, ascending.
  std::vector<std::size_t> held_out_rows(std::size_t fold) const;
};

/// Seeded fold assignment. With `stratify_by` (one label per row) each class
/// is shuffled and dealt round-robin, continuing the rotation across classes,
/// so both overall and per-class fold sizes differ by at most one.
FoldPlan k_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const int> stratify_by = {});

struct CvResult {
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
  /// Class-1 probability for each row from the model that held its fold out.
  std::vector<double> oof_proba;
  /// Fold whose held-out model produced oof_proba[i].
  std::vector<std::size_t> oof_source_fold;
};

using FitFunction = std::function<TrainedModel(const Matrix&, std::span<const int>)>;

/// Fold i's model is fitted on every row outside fold i (standardization is
/// refitted inside each training fold) and scored on fold i.
CvResult cross_validate(const FitFunction& fit_fn, const Matrix& x, std::span<const int> y,
                        const FoldPlan& plan);
CvResult cross_validate(const LearnerSpec& spec, const Dataset& ds, const FoldPlan& plan);

struct GridDimension {
  std::string name;
  std::vector<ParamValue> values;
};
using Grid = std::vector<GridDimension>;  // declaration order matters for ties

struct GridPoint {
  Hyperparams values;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct GridSearchResult {
  std::vector<GridPoint> points;  // Cartesian product, last dimension fastest
  std::size_t best_index = 0;
  LearnerSpec best_spec;
  CvResult best_cv;  // full cross-validation record of the best point
};

/// Evaluates every grid point by cross-validation. The best point has the
/// highest mean accuracy; ties go to the smallest values compared dimension
/// by dimension in declaration order.
GridSearchResult grid_search(const LearnerSpec& base, const Grid& grid, const Dataset& ds, const FoldPlan& plan);

}  // namespace heartstack
