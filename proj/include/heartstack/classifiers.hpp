#pragma once

// Concrete classifiers behind TrainedModel. Most callers only need
// learners.hpp; these are exposed for diagnostics (staged losses, gradient
// checks) and for the model store.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "heartstack/learners.hpp"
#include "heartstack/tree.hpp"

namespace heartstack {

double sigmoid(double z);
/// Mean logistic loss of margins against 0/1 labels.
double mean_log_loss(std::span<const double> margins, std::span<const int> y);

class ConstantClassifier final : public Classifier {
 public:
  explicit ConstantClassifier(int label) : label_(label) {}
  double predict_proba(std::span<const double>) const override { return label_ == 1 ? 1.0 : 0.0; }
  json to_json() const override;
  std::size_t required_width() const override { return 0; }
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  int label_;
};

/// Single classification tree.
class TreeClassifier final : public Classifier {
 public:
  explicit TreeClassifier(Tree tree) : tree_(std::move(tree)) {}
  double predict_proba(std::span<const double> row) const override { return tree_.predict(row); }
  const Tree& tree() const { return tree_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  Tree tree_;
};

/// Bagged or extremely randomized forest. Each tree votes with its leaf
/// label; the probability is the fraction of class-1 votes. An exact tie is
/// resolved towards the class with the higher mean leaf probability, then
/// class 0, and the probability is nudged just below 0.5 when class 0 wins.
class ForestClassifier final : public Classifier {
 public:
  explicit ForestClassifier(std::vector<Tree> trees) : trees_(std::move(trees)) {}
  double predict_proba(std::span<const double> row) const override;
  const std::vector<Tree>& trees() const { return trees_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  std::vector<Tree> trees_;
};

/// Additive tree model on the logit scale (gbm and xgb_style).
class BoostedTreesClassifier final : public Classifier {
 public:
  BoostedTreesClassifier(double base_margin, double learning_rate, std::vector<Tree> trees)
      : base_margin_(base_margin), learning_rate_(learning_rate), trees_(std::move(trees)) {}
  double predict_proba(std::span<const double> row) const override { return sigmoid(margin(row)); }
  double margin(std::span<const double> row, std::size_t stages) const;
  double margin(std::span<const double> row) const { return margin(row, trees_.size()); }
  /// Training loss after 0, 1, ..., n stages.
  std::vector<double> staged_log_loss(const Matrix& x, std::span<const int> y) const;
  double base_margin() const { return base_margin_; }
  const std::vector<Tree>& trees() const { return trees_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  double base_margin_;
  double learning_rate_;
  std::vector<Tree> trees_;
};

/// SAMME with depth-1 trees. Vote sum F = sum(alpha_t / 2 * h_t), h in {-1, +1};
/// probability sigma(2 F).
class AdaBoostClassifier final : public Classifier {
 public:
  AdaBoostClassifier(std::vector<Tree> stumps, std::vector<double> alphas)
      : stumps_(std::move(stumps)), alphas_(std::move(alphas)) {}
  double predict_proba(std::span<const double> row) const override;
  double vote_sum(std::span<const double> row) const;
  const std::vector<Tree>& stumps() const { return stumps_; }
  const std::vector<double>& alphas() const { return alphas_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  std::vector<Tree> stumps_;
  std::vector<double> alphas_;
};

class KnnClassifier final : public Classifier {
 public:
  KnnClassifier(Matrix rows, std::vector<int> labels, std::size_t k)
      : rows_(std::move(rows)), labels_(std::move(labels)), k_(k) {}
  double predict_proba(std::span<const double> row) const override;
  /// Indices of the k nearest stored rows, nearest first; ties by index.
  std::vector<std::size_t> neighbours(std::span<const double> row) const;
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  Matrix rows_;
  std::vector<int> labels_;
  std::size_t k_;
};

class GaussianNbClassifier final : public Classifier {
 public:
  struct ClassStats {
    double log_prior = 0.0;
    std::vector<double> mean;
    std::vector<double> variance;
  };
  explicit GaussianNbClassifier(std::array<ClassStats, 2> classes) : classes_(std::move(classes)) {}
  double predict_proba(std::span<const double> row) const override;
  double log_joint(std::span<const double> row, int cls) const;
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  std::array<ClassStats, 2> classes_;
};

/// w.x + b with a logistic link; shared by sgd_logistic and linear_svc.
class LinearClassifier final : public Classifier {
 public:
  LinearClassifier(std::vector<double> weights, double bias) : weights_(std::move(weights)), bias_(bias) {}
  double predict_proba(std::span<const double> row) const override { return sigmoid(margin(row)); }
  double margin(std::span<const double> row) const;
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  std::vector<double> weights_;
  double bias_;
};

/// Objective value and gradient for a linear model.
struct LinearGradient {
  double loss = 0.0;
  std::vector<double> weights;
  double bias = 0.0;
};

enum class LinearLoss { logistic, hinge };

/// mean_i loss(y_i, w.x_i + b) + l2 / 2 * |w|^2, with its (sub)gradient.
/// The stochastic trainers apply exactly this on one-row batches.
LinearGradient linear_objective(LinearLoss loss, std::span<const double> w, double b, const Matrix& x,
                                std::span<const int> y, double l2);

/// One hidden tanh layer, sigmoid output.
struct MlpWeights {
  std::size_t inputs = 0;
  std::size_t hidden = 0;
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // hidden
  double b2 = 0.0;

  std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + 1; }
  /// Flattened view order: w1, b1, w2, b2.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

double mlp_margin(const MlpWeights& net, std::span<const double> row, std::span<double> hidden_scratch);

/// Mean logistic loss + l2 / 2 * (|w1|^2 + |w2|^2) and its gradient in
/// flatten() order.
std::pair<double, std::vector<double>> mlp_objective(const MlpWeights& net, const Matrix& x,
                                                     std::span<const int> y, double l2);

class MlpClassifier final : public Classifier {
 public:
  explicit MlpClassifier(MlpWeights net) : net_(std::move(net)) {}
  double predict_proba(std::span<const double> row) const override;
  const MlpWeights& weights() const { return net_; }
  json to_json() const override;
  std::size_t required_width() const override;
  static std::shared_ptr<const Classifier> from_json(const json& j);

 private:
  MlpWeights net_;
};

// Per-algorithm trainers; x is already standardized where required.
std::shared_ptr<const Classifier> train_cart(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_forest(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_gbm(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_xgb(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_adaboost(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_knn(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_naive_bayes(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_linear(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);
std::shared_ptr<const Classifier> train_mlp(const LearnerSpec& spec, const Matrix& x, std::span<const int> y);

json tree_to_json(const Tree& tree);
std::size_t tree_required_width(const Tree& tree);
Tree tree_from_json(const json& j);

}  // namespace heartstack
