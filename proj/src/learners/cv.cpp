#include <algorithm>
#include <numeric>

#include "heartstack/error.hpp"
#include "heartstack/learners.hpp"
#include "heartstack/parallel.hpp"
#include "heartstack/rng.hpp"

namespace heartstack {

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignments) ++sizes[f];
  return sizes;
}

std::vector<std::size_t> FoldPlan::training_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::held_out_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan k_fold_plan(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const int> stratify_by) {
  if (k < 2) fail(ErrorCategory::config, "cross-validation needs at least 2 folds");
  if (k > n) {
    fail(ErrorCategory::config, "cannot split " + std::to_string(n) + " rows into " + std::to_string(k) + " folds");
  }
  if (!stratify_by.empty() && stratify_by.size() != n) {
    fail(ErrorCategory::data, "stratification labels do not match the row count");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = !stratify_by.empty();
  plan.assignments.assign(n, 0);

  std::vector<std::vector<std::size_t>> groups;
  if (plan.stratified) {
    groups.resize(2);
    for (std::size_t i = 0; i < n; ++i) groups[stratify_by[i] == 1 ? 1 : 0].push_back(i);
  } else {
    groups.emplace_back(n);
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }
  std::size_t next_fold = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto rng = Rng::stream(seed, g);
    rng.shuffle(std::span(groups[g]));
    for (auto row : groups[g]) {
      plan.assignments[row] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

CvResult cross_validate(const FitFunction& fit_fn, const Matrix& x, std::span<const int> y, const FoldPlan& plan) {
  if (plan.assignments.size() != x.rows() || y.size() != x.rows()) {
    fail(ErrorCategory::data, "fold plan does not cover the dataset");
  }
  CvResult result;
  result.fold_accuracy.assign(plan.k, 0.0);
  result.oof_proba.assign(x.rows(), 0.0);
  result.oof_source_fold.assign(x.rows(), plan.k);

  parallel_for(plan.k, [&](std::size_t fold) {
    const auto train_rows = plan.training_rows(fold);
    const auto test_rows = plan.held_out_rows(fold);
    std::vector<int> train_y;
    train_y.reserve(train_rows.size());
    std::array<std::size_t, 2> counts{};
    for (auto r : train_rows) {
      train_y.push_back(y[r]);
      ++counts[y[r]];
    }
    const TrainedModel model = fit_fn(x.select_rows(train_rows), train_y);
    std::size_t hits = 0;
    for (auto r : test_rows) {
      const double p = model.predict_proba(x.row(r));
      result.oof_proba[r] = p;
      result.oof_source_fold[r] = fold;
      hits += label_for(p) == y[r];
    }
    result.fold_accuracy[fold] = test_rows.empty() ? 0.0 : static_cast<double>(hits) / test_rows.size();
  });
  result.mean_accuracy =
      std::accumulate(result.fold_accuracy.begin(), result.fold_accuracy.end(), 0.0) / static_cast<double>(plan.k);
  return result;
}

CvResult cross_validate(const LearnerSpec& spec, const Dataset& ds, const FoldPlan& plan) {
  spec.validate();
  return cross_validate([&spec](const Matrix& x, std::span<const int> y) { return fit(spec, x, y); },
                        ds.features, ds.target, plan);
}

namespace {

// Strict weak order on parameter values: numbers before strings, numbers by
// value, strings lexicographically.
bool value_less(const ParamValue& a, const ParamValue& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* da = std::get_if<double>(&a)) return *da < std::get<double>(b);
  return std::get<std::string>(a) < std::get<std::string>(b);
}

}  // namespace

GridSearchResult grid_search(const LearnerSpec& base, const Grid& grid, const Dataset& ds, const FoldPlan& plan) {
  if (grid.empty()) fail(ErrorCategory::config, "grid search needs at least one dimension");
  std::size_t total = 1;
  for (const auto& dim : grid) {
    if (dim.values.empty()) fail(ErrorCategory::config, "grid dimension '" + dim.name + "' is empty");
    total *= dim.values.size();
  }

  std::vector<std::vector<std::size_t>> coords(total);
  std::vector<LearnerSpec> specs(total, base);
  for (std::size_t p = 0; p < total; ++p) {
    std::size_t rest = p;
    coords[p].assign(grid.size(), 0);
    for (std::size_t d = grid.size(); d-- > 0;) {
      coords[p][d] = rest % grid[d].values.size();
      rest /= grid[d].values.size();
    }
    for (std::size_t d = 0; d < grid.size(); ++d) {
      specs[p].hyperparameters[grid[d].name] = grid[d].values[coords[p][d]];
    }
    specs[p].validate();
  }

  GridSearchResult result;
  result.points.resize(total);
  std::vector<CvResult> runs(total);
  // Folds parallelize inside cross_validate when this loop runs sequentially.
  for (std::size_t p = 0; p < total; ++p) {
    runs[p] = cross_validate(specs[p], ds, plan);
    const CvResult& cv = runs[p];
    GridPoint& point = result.points[p];
    for (std::size_t d = 0; d < grid.size(); ++d) point.values[grid[d].name] = grid[d].values[coords[p][d]];
    point.mean_accuracy = cv.mean_accuracy;
    point.fold_accuracy = cv.fold_accuracy;
  }

  auto better = [&](std::size_t a, std::size_t b) {
    if (result.points[a].mean_accuracy != result.points[b].mean_accuracy) {
      return result.points[a].mean_accuracy > result.points[b].mean_accuracy;
    }
    for (std::size_t d = 0; d < grid.size(); ++d) {
      const auto& va = grid[d].values[coords[a][d]];
      const auto& vb = grid[d].values[coords[b][d]];
      if (value_less(va, vb)) return true;
      if (value_less(vb, va)) return false;
    }
    return false;
  };
  std::size_t best = 0;
  for (std::size_t p = 1; p < total; ++p) {
    if (better(p, best)) best = p;
  }
  result.best_index = best;
  result.best_spec = specs[best];
  result.best_cv = std::move(runs[best]);
  return result;
}

}  // namespace heartstack
