#pragma once

// Shared decision-tree core: node-level split search and recursive growth
// for classification (gini / entropy), least-squares regression (variance)
// and second-order boosting (newton) targets.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "heartstack/matrix.hpp"
#include "heartstack/rng.hpp"

namespace heartstack {

enum class Criterion { gini, entropy, variance, newton };
enum class CandidateMode { exhaustive, random_threshold };

/// Additive per-row statistics; their meaning depends on the criterion:
///   gini / entropy: {weight of class 0, weight of class 1, 0}
///   variance:       {weight, weight * y, weight * y * y}
///   newton:         {gradient, hessian, 0}
using NodeStats = std::array<double, 3>;

NodeStats class_stats(int label, double weight = 1.0);
NodeStats regression_stats(double value, double weight = 1.0);
NodeStats newton_stats(double gradient, double hessian);

struct SplitRule {
  Criterion criterion = Criterion::gini;
  CandidateMode mode = CandidateMode::exhaustive;
  std::size_t min_samples_leaf = 1;
  double lambda = 1.0;            // newton: L2 on leaf weights
  double gamma = 0.0;             // newton: penalty per added leaf
  double min_child_weight = 0.0;  // newton: minimum hessian sum per child
};

/// Weighted impurity of a node, scaled by its total weight for gini, entropy
/// (bits) and variance; for newton the structure score -G^2 / (2 (H + lambda)).
double node_loss(const NodeStats& s, const SplitRule& rule);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// Impurity decrease per unit parent weight (gini / entropy / variance) or
  /// the regularized gain including -gamma (newton). Always > 0.
  double decrease = 0.0;
};

/// Best split of `rows` over `features`. Exhaustive mode scans midpoints
/// between consecutive distinct values; random mode draws one threshold per
/// feature uniformly in [min, max) from `rng`. Ties go to the lowest feature
/// index, then the lowest threshold. Returns nullopt when nothing improves.
std::optional<Split> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                std::span<const NodeStats> stats, std::span<const std::size_t> features,
                                const SplitRule& rule, Rng* rng = nullptr);

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Leaf output: class-1 probability (classification), mean (variance) or
  /// weight -G/(H + lambda) (newton).
  double value = 0.0;
  NodeStats stats{};  // aggregated training statistics of the node

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> row) const;
  const TreeNode& leaf_for(std::span<const double> row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  SplitRule rule;
  int max_depth = -1;  // < 0: unlimited
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0: all features at every node
};

/// Every row of a matrix ordered by (value, row index), per feature. Trees
/// grown on ascending row lists (duplicates allowed) can filter this order
/// instead of sorting at every node; the resulting trees are identical.
class SortedColumns {
 public:
  explicit SortedColumns(const Matrix& x);
  std::span<const std::uint32_t> order(std::size_t feature) const { return order_[feature]; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t rows_ = 0;
  std::vector<std::vector<std::uint32_t>> order_;
};

/// Grows a tree on `rows` (indices into x / stats). Impure gini, entropy
/// and variance nodes keep splitting even when the best gain is zero (XOR),
/// so unlimited trees memorize consistent data. Per-node feature
/// subsets and random thresholds are drawn from `rng` in depth-first order.
/// `sorted` (built from x) is used only when `rows` is ascending.
Tree grow_tree(const Matrix& x, std::span<const std::size_t> rows, std::span<const NodeStats> stats,
               const TreeParams& params, Rng& rng, const SortedColumns* sorted = nullptr);

/// Leaf output for aggregated stats under `rule`.
double leaf_value(const NodeStats& s, const SplitRule& rule);

}  // namespace heartstack
