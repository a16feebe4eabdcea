#include <algorithm>
#include <cmath>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/learners.hpp"

namespace heartstack {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double mean_log_loss(std::span<const double> margins, std::span<const int> y) {
  // log(1 + exp(-s m)) with s = +-1, evaluated stably.
  double total = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    const double m = y[i] == 1 ? margins[i] : -margins[i];
    total += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  return margins.empty() ? 0.0 : total / static_cast<double>(margins.size());
}

TrainedModel::TrainedModel(LearnerSpec spec, std::optional<Standardizer> standardizer,
                           std::shared_ptr<const Classifier> classifier, std::size_t n_features)
    : spec_(std::move(spec)),
      standardizer_(std::move(standardizer)),
      classifier_(std::move(classifier)),
      n_features_(n_features) {
  if (!classifier_) fail(ErrorCategory::model, "trained model without a classifier");
  if (classifier_->required_width() > n_features_) {
    fail(ErrorCategory::model, "classifier references feature columns beyond the model width");
  }
  if (standardizer_ && standardizer_->width() != n_features_) {
    fail(ErrorCategory::model, "standardizer width does not match the model width");
  }
}

double TrainedModel::predict_proba(std::span<const double> row) const {
  if (row.size() != n_features_) {
    fail(ErrorCategory::data, "row has " + std::to_string(row.size()) + " features, model expects " +
                                  std::to_string(n_features_));
  }
  double p;
  if (standardizer_) {
    std::vector<double> z(row.size());
    standardizer_->apply_row(row, z);
    p = classifier_->predict_proba(z);
  } else {
    p = classifier_->predict_proba(row);
  }
  return std::clamp(p, 0.0, 1.0);
}

int TrainedModel::predict(std::span<const double> row) const { return label_for(predict_proba(row)); }

std::vector<double> TrainedModel::predict_proba(const Matrix& rows) const {
  std::vector<double> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict_proba(rows.row(i));
  return out;
}

std::vector<int> TrainedModel::predict(const Matrix& rows) const {
  std::vector<int> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict(rows.row(i));
  return out;
}

TrainedModel fit(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  spec.validate();
  if (x.rows() == 0 || x.rows() != y.size()) {
    fail(ErrorCategory::data, "training data is empty or labels do not match rows");
  }
  std::array<std::size_t, 2> counts{};
  for (int label : y) {
    if (label != 0 && label != 1) fail(ErrorCategory::data, "labels must be 0 or 1");
    ++counts[label];
  }
  if (spec.algorithm != Algorithm::constant && (counts[0] == 0 || counts[1] == 0)) {
    fail(ErrorCategory::data, std::string(algorithm_name(spec.algorithm)) +
                                  ": training data contains a single class");
  }

  std::optional<Standardizer> standardizer;
  const Matrix* input = &x;
  Matrix scaled;
  if (spec.needs_standardization()) {
    standardizer = Standardizer::fit(x);
    scaled = standardizer->apply(x);
    input = &scaled;
  }

  std::shared_ptr<const Classifier> classifier;
  switch (spec.algorithm) {
    case Algorithm::cart: classifier = train_cart(spec, *input, y); break;
    case Algorithm::random_forest:
    case Algorithm::extra_trees: classifier = train_forest(spec, *input, y); break;
    case Algorithm::gbm: classifier = train_gbm(spec, *input, y); break;
    case Algorithm::xgb_style: classifier = train_xgb(spec, *input, y); break;
    case Algorithm::adaboost: classifier = train_adaboost(spec, *input, y); break;
    case Algorithm::knn: classifier = train_knn(spec, *input, y); break;
    case Algorithm::naive_bayes: classifier = train_naive_bayes(spec, *input, y); break;
    case Algorithm::sgd_logistic:
    case Algorithm::linear_svc: classifier = train_linear(spec, *input, y); break;
    case Algorithm::mlp: classifier = train_mlp(spec, *input, y); break;
    case Algorithm::constant:
      classifier = std::make_shared<ConstantClassifier>(static_cast<int>(spec.number("class")));
      break;
  }
  return TrainedModel(spec, std::move(standardizer), std::move(classifier), x.cols());
}

TrainedModel fit(const LearnerSpec& spec, const Dataset& train) {
  return fit(spec, train.features, train.target);
}

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.empty() || truth.size() != predicted.size()) {
    fail(ErrorCategory::data, "accuracy needs two equal-length, non-empty label vectors");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::shared_ptr<const Classifier> classifier_from_json(Algorithm algorithm, const json& payload) {
  switch (algorithm) {
    case Algorithm::cart: return TreeClassifier::from_json(payload);
    case Algorithm::random_forest:
    case Algorithm::extra_trees: return ForestClassifier::from_json(payload);
    case Algorithm::gbm:
    case Algorithm::xgb_style: return BoostedTreesClassifier::from_json(payload);
    case Algorithm::adaboost: return AdaBoostClassifier::from_json(payload);
    case Algorithm::knn: return KnnClassifier::from_json(payload);
    case Algorithm::naive_bayes: return GaussianNbClassifier::from_json(payload);
    case Algorithm::sgd_logistic:
    case Algorithm::linear_svc: return LinearClassifier::from_json(payload);
    case Algorithm::mlp: return MlpClassifier::from_json(payload);
    case Algorithm::constant: return ConstantClassifier::from_json(payload);
  }
  fail(ErrorCategory::model, "unsupported algorithm in model payload");
}

json ConstantClassifier::to_json() const { return json{{"class", label_}}; }

std::shared_ptr<const Classifier> ConstantClassifier::from_json(const json& j) {
  return std::make_shared<ConstantClassifier>(j.at("class").get<int>());
}

json tree_to_json(const Tree& tree) {
  json feature = json::array();
  json threshold = json::array();
  json left = json::array();
  json right = json::array();
  json value = json::array();
  json stats = json::array();
  for (const auto& n : tree.nodes()) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    stats.push_back(json::array({n.stats[0], n.stats[1], n.stats[2]}));
  }
  return json{{"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right},     {"value", value},         {"stats", stats}};
}

std::size_t tree_required_width(const Tree& tree) {
  std::size_t width = 0;
  for (const auto& n : tree.nodes()) {
    if (!n.is_leaf()) width = std::max(width, static_cast<std::size_t>(n.feature) + 1);
  }
  return width;
}

Tree tree_from_json(const json& j) {
  const auto& feature = j.at("feature");
  const std::size_t n = feature.size();
  for (const char* key : {"threshold", "left", "right", "value", "stats"}) {
    if (j.at(key).size() != n) fail(ErrorCategory::model, "tree arrays have inconsistent lengths");
  }
  if (n == 0) fail(ErrorCategory::model, "tree has no nodes");
  std::vector<TreeNode> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = nodes[i];
    node.feature = feature[i].get<int>();
    node.threshold = j["threshold"][i].get<double>();
    node.left = j["left"][i].get<int>();
    node.right = j["right"][i].get<int>();
    node.value = j["value"][i].get<double>();
    const auto& s = j["stats"][i];
    node.stats = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
    if (node.feature < -1) fail(ErrorCategory::model, "tree node has a negative feature index");
    if (!node.is_leaf()) {
      const auto self = static_cast<int>(i);
      if (node.left <= self || node.right <= self || node.left >= static_cast<int>(n) ||
          node.right >= static_cast<int>(n)) {
        fail(ErrorCategory::model, "tree node " + std::to_string(i) + " has invalid children");
      }
    }
  }
  return Tree(std::move(nodes));
}

}  // namespace heartstack
