#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/parallel.hpp"

namespace heartstack {

namespace {

Criterion criterion_from(const std::string& name) { return name == "entropy" ? Criterion::entropy : Criterion::gini; }

TreeParams classification_params(const LearnerSpec& spec) {
  TreeParams p;
  p.rule.criterion = criterion_from(spec.text("criterion"));
  p.rule.min_samples_leaf = static_cast<std::size_t>(spec.number("min_samples_leaf"));
  p.max_depth = static_cast<int>(spec.number("max_depth"));
  p.min_samples_split = static_cast<std::size_t>(spec.number("min_samples_split"));
  return p;
}

std::vector<NodeStats> label_stats(std::span<const int> y) {
  std::vector<NodeStats> stats(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) stats[i] = class_stats(y[i]);
  return stats;
}

}  // namespace

std::shared_ptr<const Classifier> train_cart(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  const TreeParams params = classification_params(spec);
  const auto stats = label_stats(y);
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(spec.seed);  // unused by exhaustive search on all features
  const SortedColumns sorted(x);
  return std::make_shared<TreeClassifier>(grow_tree(x, rows, stats, params, rng, &sorted));
}

std::shared_ptr<const Classifier> train_forest(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  const bool extra = spec.algorithm == Algorithm::extra_trees;
  TreeParams params = classification_params(spec);
  params.rule.mode = extra ? CandidateMode::random_threshold : CandidateMode::exhaustive;
  const auto requested = static_cast<std::size_t>(spec.number("max_features"));
  params.max_features =
      requested == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols())))) : requested;

  const auto n_trees = static_cast<std::size_t>(spec.number("n_estimators"));
  const auto stats = label_stats(y);
  const std::size_t n = x.rows();
  std::vector<Tree> trees(n_trees);
  std::optional<SortedColumns> sorted;
  if (!extra) sorted.emplace(x);
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng = Rng::stream(spec.seed, t);
    std::vector<std::size_t> rows(n);
    if (extra) {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    } else {
      for (auto& r : rows) r = rng.below(n);
      std::sort(rows.begin(), rows.end());  // a bootstrap sample is a multiset
    }
    trees[t] = grow_tree(x, rows, stats, params, rng, sorted ? &*sorted : nullptr);
  });
  return std::make_shared<ForestClassifier>(std::move(trees));
}

json TreeClassifier::to_json() const { return json{{"tree", tree_to_json(tree_)}}; }

std::size_t TreeClassifier::required_width() const { return tree_required_width(tree_); }

std::shared_ptr<const Classifier> TreeClassifier::from_json(const json& j) {
  return std::make_shared<TreeClassifier>(tree_from_json(j.at("tree")));
}

double ForestClassifier::predict_proba(std::span<const double> row) const {
  std::size_t votes = 0;
  double prob_sum = 0.0;
  for (const auto& tree : trees_) {
    const double p = tree.predict(row);
    votes += label_for(p);
    prob_sum += p;
  }
  const auto total = static_cast<double>(trees_.size());
  const double fraction = static_cast<double>(votes) / total;
  if (2 * votes == trees_.size()) {
    const bool class_one = prob_sum / total > 0.5;
    return class_one ? 0.5 : std::nextafter(0.5, 0.0);
  }
  return fraction;
}

json ForestClassifier::to_json() const {
  json trees = json::array();
  for (const auto& t : trees_) trees.push_back(tree_to_json(t));
  return json{{"trees", trees}};
}

std::size_t ForestClassifier::required_width() const {
  std::size_t width = 0;
  for (const auto& t : trees_) width = std::max(width, tree_required_width(t));
  return width;
}

std::shared_ptr<const Classifier> ForestClassifier::from_json(const json& j) {
  std::vector<Tree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
  if (trees.empty()) fail(ErrorCategory::model, "forest has no trees");
  return std::make_shared<ForestClassifier>(std::move(trees));
}

}  // namespace heartstack
