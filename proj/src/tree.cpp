#include "heartstack/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace heartstack {

namespace {

// Relative slack when comparing candidate decreases; equal-valued splits
// computed along different summation paths must still tie.
constexpr double kTieEps = 1e-12;

bool improves(double candidate, double best) {
  return candidate > best + kTieEps * std::max(1.0, std::abs(best));
}

NodeStats add(const NodeStats& a, const NodeStats& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
NodeStats sub(const NodeStats& a, const NodeStats& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

double weight_of(const NodeStats& s, const SplitRule& rule) {
  switch (rule.criterion) {
    case Criterion::gini:
    case Criterion::entropy: return s[0] + s[1];
    case Criterion::variance: return s[0];
    case Criterion::newton: return s[1];
  }
  return 0.0;
}

double decrease_of(const NodeStats& parent, const NodeStats& left, const NodeStats& right,
                   const SplitRule& rule) {
  const double raw = node_loss(parent, rule) - node_loss(left, rule) - node_loss(right, rule);
  if (rule.criterion == Criterion::newton) return raw - rule.gamma;
  const double w = weight_of(parent, rule);
  return w > 0.0 ? raw / w : 0.0;
}

bool children_ok(std::size_t n_left, std::size_t n_right, const NodeStats& left, const NodeStats& right,
                 const SplitRule& rule) {
  if (n_left < rule.min_samples_leaf || n_right < rule.min_samples_leaf) return false;
  if (n_left == 0 || n_right == 0) return false;
  if (rule.criterion == Criterion::newton) {
    return left[1] >= rule.min_child_weight && right[1] >= rule.min_child_weight;
  }
  return true;
}

}  // namespace

NodeStats class_stats(int label, double weight) {
  return label == 1 ? NodeStats{0.0, weight, 0.0} : NodeStats{weight, 0.0, 0.0};
}

NodeStats regression_stats(double value, double weight) { return {weight, weight * value, weight * value * value}; }

NodeStats newton_stats(double gradient, double hessian) { return {gradient, hessian, 0.0}; }

double node_loss(const NodeStats& s, const SplitRule& rule) {
  switch (rule.criterion) {
    case Criterion::gini: {
      const double w = s[0] + s[1];
      if (w <= 0.0) return 0.0;
      const double p0 = s[0] / w;
      const double p1 = s[1] / w;
      return w * (1.0 - p0 * p0 - p1 * p1);
    }
    case Criterion::entropy: {
      const double w = s[0] + s[1];
      if (w <= 0.0) return 0.0;
      double h = 0.0;
      for (double c : {s[0], s[1]}) {
        if (c > 0.0) {
          const double p = c / w;
          h -= p * std::log2(p);
        }
      }
      return w * h;
    }
    case Criterion::variance: {
      if (s[0] <= 0.0) return 0.0;
      return std::max(0.0, s[2] - s[1] * s[1] / s[0]);
    }
    case Criterion::newton: return -0.5 * s[0] * s[0] / (s[1] + rule.lambda);
  }
  return 0.0;
}

double leaf_value(const NodeStats& s, const SplitRule& rule) {
  switch (rule.criterion) {
    case Criterion::gini:
    case Criterion::entropy: {
      const double w = s[0] + s[1];
      return w > 0.0 ? s[1] / w : 0.5;
    }
    case Criterion::variance: return s[0] > 0.0 ? s[1] / s[0] : 0.0;
    case Criterion::newton: return -s[0] / (s[1] + rule.lambda);
  }
  return 0.0;
}

namespace {

// Shared split search. `ordered(feature)` yields the node rows sorted by
// (value, position); it is only called in exhaustive mode. With
// `zero_gain_fallback`, a node where no candidate improves still gets the
// first admissible candidate (lowest feature, lowest threshold), with
// decrease 0, so impure nodes such as XOR keep splitting.
template <class Ordered>
std::optional<Split> search(const Matrix& x, std::span<const std::size_t> rows, std::span<const NodeStats> stats,
                            std::span<const std::size_t> features, const SplitRule& rule, Rng* rng,
                            bool zero_gain_fallback, Ordered&& ordered) {
  if (rows.size() < 2) return std::nullopt;
  NodeStats total{};
  for (auto r : rows) total = add(total, stats[r]);

  std::optional<Split> best;
  std::optional<Split> fallback;
  double best_decrease = 0.0;
  auto consider = [&](std::size_t feature, double threshold, double dec) {
    if (zero_gain_fallback && !fallback) fallback = Split{feature, threshold, 0.0};
    if (dec <= 0.0) return;
    const bool tie = best && !improves(dec, best_decrease) && !improves(best_decrease, dec);
    if (!best || improves(dec, best_decrease) || (tie && feature < best->feature)) {
      best = Split{feature, threshold, dec};
      best_decrease = dec;
    }
  };

  for (std::size_t feature : features) {
    if (rule.mode == CandidateMode::random_threshold) {
      double lo = x(rows[0], feature);
      double hi = lo;
      for (auto r : rows) {
        lo = std::min(lo, x(r, feature));
        hi = std::max(hi, x(r, feature));
      }
      if (!(lo < hi) || rng == nullptr) continue;
      const double threshold = rng->uniform(lo, hi);
      NodeStats left{};
      std::size_t n_left = 0;
      for (auto r : rows) {
        if (x(r, feature) <= threshold) {
          left = add(left, stats[r]);
          ++n_left;
        }
      }
      const NodeStats right = sub(total, left);
      if (!children_ok(n_left, rows.size() - n_left, left, right, rule)) continue;
      consider(feature, threshold, decrease_of(total, left, right, rule));
      continue;
    }

    const std::vector<std::pair<double, std::size_t>>& keyed = ordered(feature);
    NodeStats left{};
    for (std::size_t i = 0; i + 1 < keyed.size(); ++i) {
      left = add(left, stats[keyed[i].second]);
      const double a = keyed[i].first;
      const double b = keyed[i + 1].first;
      if (!(a < b)) continue;
      const std::size_t n_left = i + 1;
      const NodeStats right = sub(total, left);
      if (!children_ok(n_left, keyed.size() - n_left, left, right, rule)) continue;
      double threshold = a + (b - a) / 2.0;
      if (!(threshold < b)) threshold = a;
      consider(feature, threshold, decrease_of(total, left, right, rule));
    }
  }
  return best ? best : fallback;
}

}  // namespace

namespace {

// Node rows in (value, position) order for one feature, by sorting.
class LocalOrder {
 public:
  const std::vector<std::pair<double, std::size_t>>& operator()(const Matrix& x, std::span<const std::size_t> rows,
                                                                 std::size_t feature) {
    by_position_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) by_position_[i] = {x(rows[i], feature), i};
    std::sort(by_position_.begin(), by_position_.end());
    keyed_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) keyed_[i] = {by_position_[i].first, rows[by_position_[i].second]};
    return keyed_;
  }

 private:
  std::vector<std::pair<double, std::size_t>> by_position_;
  std::vector<std::pair<double, std::size_t>> keyed_;
};

}  // namespace

std::optional<Split> best_split(const Matrix& x, std::span<const std::size_t> rows,
                                std::span<const NodeStats> stats, std::span<const std::size_t> features,
                                const SplitRule& rule, Rng* rng) {
  LocalOrder local;
  return search(x, rows, stats, features, rule, rng, false,
                [&](std::size_t feature) -> const auto& { return local(x, rows, feature); });
}

SortedColumns::SortedColumns(const Matrix& x) : rows_(x.rows()), order_(x.cols()) {
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& o = order_[f];
    o.resize(x.rows());
    std::iota(o.begin(), o.end(), std::uint32_t{0});
    std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
      const double va = x(a, f);
      const double vb = x(b, f);
      return va < vb || (va == vb && a < b);
    });
  }
}

double Tree::predict(std::span<const double> row) const { return leaf_for(row).value; }

const TreeNode& Tree::leaf_for(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i];
}

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    deepest = std::max(deepest, depth[i]);
    if (!n.is_leaf()) {
      depth[n.left] = depth[i] + 1;
      depth[n.right] = depth[i] + 1;
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

class Grower {
 public:
  Grower(const Matrix& x, std::span<const NodeStats> stats, const TreeParams& params, Rng& rng,
         const SortedColumns* sorted)
      : x_(x), stats_(stats), params_(params), rng_(rng), sorted_(sorted) {
    all_features_.resize(x.cols());
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    if (sorted_ != nullptr) member_.assign(x.rows(), 0);
  }

  // Children are always appended after their parent, so node 0 is the root
  // and a forward scan visits parents first.
  int grow(std::vector<std::size_t> rows, int depth) {
    NodeStats total{};
    for (auto r : rows) total = add(total, stats_[r]);
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, leaf_value(total, params_.rule), total});

    if (stop(rows, total, depth)) return id;
    const auto features = candidate_features();
    const bool fallback = params_.rule.criterion != Criterion::newton && node_loss(total, params_.rule) > 0.0;
    auto split = sorted_ != nullptr ? presorted_split(rows, features, fallback)
                                    : search(x_, rows, stats_, features, params_.rule, &rng_, fallback,
                                             [&](std::size_t feature) -> const auto& {
                                               return local_(x_, rows, feature);
                                             });
    if (!split) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) (x_(r, split->feature) <= split->threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = nodes_[id];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<TreeNode> take() { return std::move(nodes_); }

 private:
  bool stop(const std::vector<std::size_t>& rows, const NodeStats& total, int depth) const {
    if (params_.max_depth >= 0 && depth >= params_.max_depth) return true;
    if (rows.size() < std::max<std::size_t>(2, params_.min_samples_split)) return true;
    const auto c = params_.rule.criterion;
    if ((c == Criterion::gini || c == Criterion::entropy) && (total[0] <= 0.0 || total[1] <= 0.0)) return true;
    return false;
  }

  // Rows are ascending, so position order equals (row, copy) order and the
  // filtered global order, repeating duplicated rows, is the stable order by
  // value. Small nodes are cheaper to sort directly; both give the same order.
  std::optional<Split> presorted_split(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& features,
                                      bool fallback) {
    if (rows.size() * 16 < x_.rows()) {
      return search(x_, rows, stats_, features, params_.rule, &rng_, fallback,
                    [&](std::size_t feature) -> const auto& { return local_(x_, rows, feature); });
    }
    for (auto r : rows) ++member_[r];
    auto split = search(x_, rows, stats_, features, params_.rule, &rng_, fallback, [&](std::size_t feature) -> const auto& {
      keyed_.clear();
      for (auto r : sorted_->order(feature)) {
        for (unsigned c = 0; c < member_[r]; ++c) keyed_.emplace_back(x_(r, feature), r);
      }
      return keyed_;
    });
    for (auto r : rows) member_[r] = 0;
    return split;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = all_features_.size();
    if (params_.max_features == 0 || params_.max_features >= d) return all_features_;
    // Partial Fisher-Yates, then restore index order so ties stay "lowest feature".
    std::vector<std::size_t> pool = all_features_;
    for (std::size_t i = 0; i < params_.max_features; ++i) {
      const std::size_t j = i + rng_.below(d - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(params_.max_features);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  const Matrix& x_;
  std::span<const NodeStats> stats_;
  const TreeParams& params_;
  Rng& rng_;
  const SortedColumns* sorted_;
  std::vector<unsigned> member_;
  LocalOrder local_;
  std::vector<std::pair<double, std::size_t>> keyed_;
  std::vector<std::size_t> all_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Tree grow_tree(const Matrix& x, std::span<const std::size_t> rows, std::span<const NodeStats> stats,
               const TreeParams& params, Rng& rng, const SortedColumns* sorted) {
  const bool ascending = std::is_sorted(rows.begin(), rows.end());
  const bool usable = sorted != nullptr && sorted->rows() == x.rows() && ascending &&
                      params.rule.mode == CandidateMode::exhaustive;
  Grower grower(x, stats, params, rng, usable ? sorted : nullptr);
  grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  return Tree(grower.take());
}

}  // namespace heartstack
