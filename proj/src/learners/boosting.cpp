#include <algorithm>
#include <cmath>
#include <numeric>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"

namespace heartstack {

namespace {

double prior_log_odds(std::span<const int> y) {
  const double positives = static_cast<double>(std::count(y.begin(), y.end(), 1));
  const double rate = positives / static_cast<double>(y.size());
  return std::log(rate / (1.0 - rate));
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

// Stagewise logistic boosting: each stage fits a least-squares tree to the
// residual y - p and adds it with shrinkage.
std::shared_ptr<const Classifier> train_gbm(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  TreeParams params;
  params.rule.criterion = Criterion::variance;
  params.rule.min_samples_leaf = static_cast<std::size_t>(spec.number("min_samples_leaf"));
  params.max_depth = static_cast<int>(spec.number("max_depth"));
  params.min_samples_split = static_cast<std::size_t>(spec.number("min_samples_split"));
  const double shrinkage = spec.number("learning_rate");
  const auto stages = static_cast<std::size_t>(spec.number("n_estimators"));

  const std::size_t n = x.rows();
  const double base = prior_log_odds(y);
  std::vector<double> margin(n, base);
  std::vector<NodeStats> stats(n);
  const auto rows = all_rows(n);
  Rng rng(spec.seed);
  const SortedColumns sorted(x);
  std::vector<Tree> trees;
  trees.reserve(stages);
  for (std::size_t m = 0; m < stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) stats[i] = regression_stats(y[i] - sigmoid(margin[i]));
    Tree tree = grow_tree(x, rows, stats, params, rng, &sorted);
    for (std::size_t i = 0; i < n; ++i) margin[i] += shrinkage * tree.predict(x.row(i));
    trees.push_back(std::move(tree));
  }
  return std::make_shared<BoostedTreesClassifier>(base, shrinkage, std::move(trees));
}

// Second-order boosting: g = p - y, h = p (1 - p); leaf weight -G / (H + lambda),
// split gain from the regularized structure score minus gamma.
std::shared_ptr<const Classifier> train_xgb(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  TreeParams params;
  params.rule.criterion = Criterion::newton;
  params.rule.lambda = spec.number("lambda");
  params.rule.gamma = spec.number("gamma");
  params.rule.min_child_weight = spec.number("min_child_weight");
  params.max_depth = static_cast<int>(spec.number("max_depth"));
  const double eta = spec.number("learning_rate");
  const auto stages = static_cast<std::size_t>(spec.number("n_estimators"));

  const std::size_t n = x.rows();
  const double base = prior_log_odds(y);
  std::vector<double> margin(n, base);
  std::vector<NodeStats> stats(n);
  const auto rows = all_rows(n);
  Rng rng(spec.seed);
  const SortedColumns sorted(x);
  std::vector<Tree> trees;
  trees.reserve(stages);
  for (std::size_t m = 0; m < stages; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      stats[i] = newton_stats(p - y[i], p * (1.0 - p));
    }
    Tree tree = grow_tree(x, rows, stats, params, rng, &sorted);
    for (std::size_t i = 0; i < n; ++i) margin[i] += eta * tree.predict(x.row(i));
    trees.push_back(std::move(tree));
  }
  return std::make_shared<BoostedTreesClassifier>(base, eta, std::move(trees));
}

double BoostedTreesClassifier::margin(std::span<const double> row, std::size_t stages) const {
  double m = base_margin_;
  const std::size_t count = std::min(stages, trees_.size());
  for (std::size_t t = 0; t < count; ++t) m += learning_rate_ * trees_[t].predict(row);
  return m;
}

std::vector<double> BoostedTreesClassifier::staged_log_loss(const Matrix& x, std::span<const int> y) const {
  std::vector<double> margins(x.rows(), base_margin_);
  std::vector<double> losses{mean_log_loss(margins, y)};
  for (const auto& tree : trees_) {
    for (std::size_t i = 0; i < x.rows(); ++i) margins[i] += learning_rate_ * tree.predict(x.row(i));
    losses.push_back(mean_log_loss(margins, y));
  }
  return losses;
}

json BoostedTreesClassifier::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t));
  return json{{"base_margin", base_margin_}, {"learning_rate", learning_rate_}, {"trees", trees}};
}

std::size_t BoostedTreesClassifier::required_width() const {
  std::size_t width = 0;
  for (const auto& t : trees_) width = std::max(width, tree_required_width(t));
  return width;
}

std::shared_ptr<const Classifier> BoostedTreesClassifier::from_json(const json& j) {
  std::vector<Tree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
  return std::make_shared<BoostedTreesClassifier>(j.at("base_margin").get<double>(),
                                                  j.at("learning_rate").get<double>(), std::move(trees));
}

// SAMME for two classes: alpha = lr * ln((1 - err) / err); misclassified rows
// are up-weighted by exp(alpha).
std::shared_ptr<const Classifier> train_adaboost(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  const auto rounds = static_cast<std::size_t>(spec.number("n_estimators"));
  const double learning_rate = spec.number("learning_rate");
  const std::size_t n = x.rows();
  TreeParams params;
  params.rule.criterion = Criterion::gini;
  params.max_depth = 1;
  const auto rows = all_rows(n);
  Rng rng(spec.seed);
  const SortedColumns sorted(x);

  std::vector<double> weight(n, 1.0 / static_cast<double>(n));
  std::vector<NodeStats> stats(n);
  std::vector<Tree> stumps;
  std::vector<double> alphas;
  for (std::size_t t = 0; t < rounds; ++t) {
    for (std::size_t i = 0; i < n; ++i) stats[i] = class_stats(y[i], weight[i]);
    Tree stump = grow_tree(x, rows, stats, params, rng, &sorted);
    double err = 0.0;
    double total = 0.0;
    std::vector<bool> miss(n);
    for (std::size_t i = 0; i < n; ++i) {
      miss[i] = label_for(stump.predict(x.row(i))) != y[i];
      if (miss[i]) err += weight[i];
      total += weight[i];
    }
    err /= total;
    if (err <= 0.0) {
      // Perfect stump: it decides alone.
      stumps.push_back(std::move(stump));
      alphas.push_back(1.0);
      break;
    }
    if (err >= 0.5) {
      if (stumps.empty()) {
        stumps.push_back(std::move(stump));
        alphas.push_back(1.0);
      }
      break;
    }
    const double alpha = learning_rate * std::log((1.0 - err) / err);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (miss[i]) weight[i] *= std::exp(alpha);
      norm += weight[i];
    }
    for (auto& w : weight) w /= norm;
    stumps.push_back(std::move(stump));
    alphas.push_back(alpha);
  }
  return std::make_shared<AdaBoostClassifier>(std::move(stumps), std::move(alphas));
}

double AdaBoostClassifier::vote_sum(std::span<const double> row) const {
  double f = 0.0;
  for (std::size_t t = 0; t < stumps_.size(); ++t) {
    const double h = label_for(stumps_[t].predict(row)) == 1 ? 1.0 : -1.0;
    f += 0.5 * alphas_[t] * h;
  }
  return f;
}

double AdaBoostClassifier::predict_proba(std::span<const double> row) const { return sigmoid(2.0 * vote_sum(row)); }

json AdaBoostClassifier::to_json() const {
  json stumps = json::array();
  for (const auto& t : stumps_) stumps.push_back(tree_to_json(t));
  return json{{"stumps", stumps}, {"alphas", alphas_}};
}

std::size_t AdaBoostClassifier::required_width() const {
  std::size_t width = 0;
  for (const auto& t : stumps_) width = std::max(width, tree_required_width(t));
  return width;
}

std::shared_ptr<const Classifier> AdaBoostClassifier::from_json(const json& j) {
  std::vector<Tree> stumps;
  for (const auto& t : j.at("stumps")) stumps.push_back(tree_from_json(t));
  auto alphas = j.at("alphas").get<std::vector<double>>();
  if (stumps.size() != alphas.size() || stumps.empty()) {
    fail(ErrorCategory::model, "adaboost payload has mismatched stumps and weights");
  }
  return std::make_shared<AdaBoostClassifier>(std::move(stumps), std::move(alphas));
}

}  // namespace heartstack
