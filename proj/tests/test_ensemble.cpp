#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "heartstack/ensemble.hpp"
#include "heartstack/error.hpp"
#include "synthetic.hpp"

namespace hs = heartstack;
using hs::Algorithm;

namespace {

hs::LearnerSpec spec(Algorithm a, hs::Hyperparams h = {}) { return hs::LearnerSpec{a, std::move(h), 42}; }

std::vector<hs::LearnerSpec> quick_candidates() {
  return {spec(Algorithm::gbm, {{"n_estimators", 20.0}}), spec(Algorithm::random_forest, {{"n_estimators", 15.0}}),
          spec(Algorithm::cart, {{"max_depth", 4.0}}), spec(Algorithm::knn),
          spec(Algorithm::naive_bayes), spec(Algorithm::sgd_logistic, {{"epochs", 20.0}})};
}

hs::StackingConfig quick_config(std::size_t top_n = 3, std::size_t folds = 5) {
  hs::StackingConfig c;
  c.candidate_specs = quick_candidates();
  c.top_n = top_n;
  c.oof_folds = folds;
  c.seed = 7;
  return c;
}

std::vector<hs::CandidateScore> scores(const std::vector<std::pair<Algorithm, double>>& table) {
  std::vector<hs::CandidateScore> out;
  for (const auto& [a, acc] : table) out.push_back(hs::CandidateScore{spec(a), acc, {}});
  return out;
}

std::vector<Algorithm> selected_algorithms(const hs::BaseSelectionReport& r) {
  std::vector<Algorithm> out;
  for (auto i : r.selected) out.push_back(r.candidates[i].spec.algorithm);
  return out;
}

}  // namespace

TEST_CASE("selection examples") {
  SUBCASE("argmax set") {
    const auto r = hs::select_base_learners(
        scores({{Algorithm::cart, 0.9}, {Algorithm::knn, 0.8}, {Algorithm::mlp, 0.7}}), 2);
    CHECK(selected_algorithms(r) == std::vector<Algorithm>{Algorithm::cart, Algorithm::knn});
    CHECK(r.rejected == std::vector<std::size_t>{2});
  }
  SUBCASE("published baseline accuracies, gbm wins the three-way tie") {
    const auto r = hs::select_base_learners(scores({{Algorithm::xgb_style, 0.9191},
                                                    {Algorithm::extra_trees, 0.9093},
                                                    {Algorithm::random_forest, 0.9021},
                                                    {Algorithm::gbm, 0.8425},
                                                    {Algorithm::cart, 0.8425},
                                                    {Algorithm::mlp, 0.8425},
                                                    {Algorithm::adaboost, 0.8340},
                                                    {Algorithm::linear_svc, 0.8255},
                                                    {Algorithm::sgd_logistic, 0.8212},
                                                    {Algorithm::knn, 0.8085}}),
                                            4);
    CHECK(selected_algorithms(r) == std::vector<Algorithm>{Algorithm::xgb_style, Algorithm::extra_trees,
                                                           Algorithm::random_forest, Algorithm::gbm});
    CHECK(r.rejected.size() == 6);
  }
  SUBCASE("all equal keeps declaration order") {
    const auto r = hs::select_base_learners(
        scores({{Algorithm::knn, 0.5}, {Algorithm::cart, 0.5}, {Algorithm::mlp, 0.5}, {Algorithm::gbm, 0.5}}), 3);
    CHECK(r.selected == std::vector<std::size_t>{0, 1, 2});
  }
  SUBCASE("too few candidates") {
    CHECK_THROWS_AS(hs::select_base_learners(scores({{Algorithm::knn, 0.5}}), 2), hs::Error);
    CHECK_THROWS_AS(hs::select_base_learners(scores({{Algorithm::knn, 0.5}}), 0), hs::Error);
  }
}

TEST_CASE("selection matches a sort oracle on random tables") {
  hs::Rng rng(3);
  const auto& algs = hs::baseline_algorithms();
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = 1 + rng.below(algs.size());
    const std::size_t top_n = 1 + rng.below(n);
    std::vector<std::pair<Algorithm, double>> table;
    for (std::size_t i = 0; i < n; ++i) table.emplace_back(algs[i], static_cast<double>(rng.below(5)) / 4.0);
    const auto r = hs::select_base_learners(scores(table), top_n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return table[a].second > table[b].second || (table[a].second == table[b].second && a < b);
    });
    order.resize(top_n);
    CHECK(r.selected == order);
    CHECK(r.selected.size() + r.rejected.size() == n);
    CHECK(std::is_sorted(r.rejected.begin(), r.rejected.end()));
    const auto round_trip = hs::selection_from_json(hs::to_json(r));
    CHECK(round_trip.selected == r.selected);
    CHECK(round_trip.rejected == r.rejected);
  }
}

TEST_CASE("stacking config validation and round trip") {
  auto c = quick_config();
  CHECK_NOTHROW(c.validate());
  const auto back = hs::stacking_config_from_json(hs::to_json(c));
  CHECK(back.top_n == c.top_n);
  CHECK(back.oof_folds == c.oof_folds);
  CHECK(back.seed == c.seed);
  CHECK(back.meta_spec == c.meta_spec);
  CHECK(back.candidate_specs == c.candidate_specs);
  c.top_n = 7;
  CHECK_THROWS_AS(c.validate(), hs::Error);
  c.top_n = 0;
  CHECK_THROWS_AS(c.validate(), hs::Error);
  c = quick_config();
  c.oof_folds = 1;
  CHECK_THROWS_AS(c.validate(), hs::Error);
  c = quick_config();
  c.candidate_specs.clear();
  c.top_n = 0;
  CHECK_THROWS_AS(c.validate(), hs::Error);
}

TEST_CASE("degenerate constant bases") {
  std::vector<int> y(40);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  hs::Rng rng(1);
  const auto x = hs::testing::random_matrix(40, 3, rng);
  hs::StackingConfig c;
  c.candidate_specs = {hs::LearnerSpec{Algorithm::constant, {{"class", 0.0}}, 0},
                       hs::LearnerSpec{Algorithm::constant, {{"class", 1.0}}, 0}};
  c.top_n = 2;
  hs::StackTrace trace;
  const auto model = hs::fit_stack(c, x, y, &trace);
  for (std::size_t r = 0; r < 40; ++r) {
    CHECK(trace.meta_features(r, 0) == 0.0);
    CHECK(trace.meta_features(r, 1) == 1.0);
  }
  CHECK(hs::accuracy(y, model.predict(x)) >= 0.5);
}

TEST_CASE("a perfect memorizer carries the stack") {
  hs::Rng rng(2);
  const auto x = hs::testing::random_matrix(120, 3, rng);
  std::vector<int> y;
  for (std::size_t r = 0; r < x.rows(); ++r) y.push_back(x(r, 0) > 0.1 ? 1 : 0);
  hs::StackingConfig c;
  c.candidate_specs = {spec(Algorithm::cart)};
  c.top_n = 1;
  const auto model = hs::fit_stack(c, x, y);
  CHECK(hs::accuracy(y, model.predict(x)) == 1.0);
}

TEST_CASE("an oracle base decides held-out predictions") {
  // Feature 0 is the label itself, so cart becomes a label oracle.
  hs::Rng rng(4);
  auto make = [&](std::size_t n) {
    hs::Matrix x = hs::testing::random_matrix(n, 4, rng);
    std::vector<int> y = hs::testing::random_labels(n, rng);
    for (std::size_t r = 0; r < n; ++r) x(r, 0) = y[r];
    return std::pair{x, y};
  };
  const auto [x, y] = make(150);
  const auto [hx, hy] = make(80);
  hs::StackingConfig c;
  c.candidate_specs = {spec(Algorithm::cart), hs::LearnerSpec{Algorithm::constant, {{"class", 0.0}}, 0},
                       spec(Algorithm::knn)};
  c.top_n = 2;
  const auto model = hs::fit_stack(c, x, y);
  REQUIRE(model.selection().candidates[model.selection().selected[0]].spec.algorithm == Algorithm::cart);
  const auto& oracle = model.bases()[0];
  CHECK(model.predict(hx) == oracle.predict(hx));
  CHECK(model.predict(hx) == hy);
}

TEST_CASE("out-of-fold purity and meta features") {
  const auto ds = hs::testing::synthetic_heart(150, 5);
  const auto config = quick_config();
  hs::StackTrace trace;
  const auto model = hs::fit_stack(config, ds, &trace);
  const auto& plan = model.fold_plan();
  REQUIRE(plan.k == config.oof_folds);
  CHECK(plan.assignments == hs::k_fold_plan(ds.size(), config.oof_folds, config.seed, ds.target).assignments);
  REQUIRE(trace.meta_features.rows() == ds.size());
  REQUIRE(trace.meta_features.cols() == config.top_n);
  REQUIRE(model.bases().size() == config.top_n);
  CHECK(model.meta().n_features() == config.top_n);

  for (std::size_t b = 0; b < config.top_n; ++b) {
    const auto& base_spec = model.selection().candidates[model.selection().selected[b]].spec;
    CHECK(model.bases()[b].spec() == base_spec);
    for (std::size_t f = 0; f < plan.k; ++f) {
      // Refit the fold model independently; its training rows exclude the fold.
      const auto train_rows = plan.training_rows(f);
      hs::Matrix tx(0, ds.features.cols());
      std::vector<int> ty;
      for (auto r : train_rows) {
        tx.append_row(ds.features.row(r));
        ty.push_back(ds.target[r]);
      }
      const auto fold_model = hs::fit(base_spec, tx, ty);
      for (auto r : plan.held_out_rows(f)) {
        CHECK(trace.oof_source_fold[b][r] == f);
        CHECK_FALSE(std::binary_search(train_rows.begin(), train_rows.end(), r));
        CHECK(trace.meta_features(r, b) == fold_model.predict_proba(ds.features.row(r)));
      }
    }
  }
  // Meta features at predict time come from the refit bases.
  const auto row = ds.features.row(3);
  const auto mf = model.meta_features(row);
  for (std::size_t b = 0; b < config.top_n; ++b) CHECK(mf[b] == model.bases()[b].predict_proba(row));
  CHECK(model.predict_proba(row) == model.meta().predict_proba(mf));
}

TEST_CASE("selection reflects candidate cross-validation") {
  const auto ds = hs::testing::synthetic_heart(150, 6);
  const auto config = quick_config();
  const auto model = hs::fit_stack(config, ds);
  const auto plan = hs::k_fold_plan(ds.size(), config.oof_folds, config.seed, ds.target);
  const auto& report = model.selection();
  REQUIRE(report.candidates.size() == config.candidate_specs.size());
  for (std::size_t i = 0; i < report.candidates.size(); ++i) {
    const auto cv = hs::cross_validate(config.candidate_specs[i], ds, plan);
    CHECK(report.candidates[i].mean_accuracy == cv.mean_accuracy);
    CHECK(report.candidates[i].fold_accuracy == cv.fold_accuracy);
  }
}

TEST_CASE("fit_stack_from_cv reproduces fit_stack") {
  const auto ds = hs::testing::synthetic_heart(140, 7);
  const auto config = quick_config();
  const auto plan = hs::k_fold_plan(ds.size(), config.oof_folds, config.seed, ds.target);
  std::vector<hs::CvResult> cv;
  for (const auto& s : config.candidate_specs) cv.push_back(hs::cross_validate(s, ds, plan));
  hs::StackTrace ta, tb;
  const auto a = hs::fit_stack(config, ds, &ta);
  const auto b = hs::fit_stack_from_cv(config, ds.features, ds.target, plan, cv, &tb);
  CHECK(ta.meta_features == tb.meta_features);
  CHECK(a.selection().selected == b.selection().selected);
  const auto probe = hs::testing::synthetic_heart(60, 70);
  CHECK(a.predict_proba(probe.features) == b.predict_proba(probe.features));
  std::vector<hs::CvResult> short_cv(cv.begin(), cv.end() - 1);
  CHECK_THROWS_AS(hs::fit_stack_from_cv(config, ds.features, ds.target, plan, short_cv), hs::Error);
}

TEST_CASE("stacking is deterministic and probabilities stay in range") {
  const auto ds = hs::testing::synthetic_heart(150, 8);
  const auto config = quick_config(2, 4);
  hs::StackTrace ta, tb;
  const auto a = hs::fit_stack(config, ds, &ta);
  const auto b = hs::fit_stack(config, ds, &tb);
  CHECK(ta.meta_features == tb.meta_features);
  CHECK(a.selection().selected == b.selection().selected);
  hs::Rng rng(11);
  const auto wild = hs::testing::random_matrix(1000, 11, rng, -500.0, 500.0);
  const auto pa = a.predict_proba(wild);
  CHECK(pa == b.predict_proba(wild));
  const auto labels = a.predict(wild);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i] >= 0.0);
    CHECK(pa[i] <= 1.0);
    CHECK(labels[i] == (pa[i] >= 0.5 ? 1 : 0));
  }
  // Equal rows give equal outputs.
  CHECK(a.predict_proba(ds.features.row(0)) == a.predict_proba(ds.features.row(0)));
}

TEST_CASE("stacked model shape is validated") {
  const auto ds = hs::testing::synthetic_heart(80, 9);
  const auto base = hs::fit(spec(Algorithm::cart), ds);
  hs::Matrix meta_x(4, 2, std::vector<double>{0, 0, 1, 1, 0, 1, 1, 0});
  const auto meta2 = hs::fit(spec(Algorithm::sgd_logistic), meta_x, std::vector<int>{0, 1, 0, 1});
  const auto selection = hs::select_base_learners(scores({{Algorithm::cart, 0.8}}), 1);
  const auto plan = hs::k_fold_plan(ds.size(), 5, 1);
  CHECK_THROWS_AS(hs::StackedModel({base}, meta2, selection, plan), hs::Error);
}
