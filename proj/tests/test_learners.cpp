#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/learners.hpp"
#include "synthetic.hpp"

namespace hs = heartstack;
using hs::Algorithm;

namespace {

hs::LearnerSpec spec(Algorithm a, hs::Hyperparams h = {}, std::uint64_t seed = 42) {
  return hs::LearnerSpec{a, std::move(h), seed};
}

// Small but representative settings so the whole suite stays quick.
hs::LearnerSpec quick(Algorithm a, std::uint64_t seed = 42) {
  switch (a) {
    case Algorithm::random_forest:
    case Algorithm::extra_trees: return spec(a, {{"n_estimators", 25.0}}, seed);
    case Algorithm::gbm:
    case Algorithm::xgb_style: return spec(a, {{"n_estimators", 30.0}}, seed);
    case Algorithm::mlp: return spec(a, {{"epochs", 100.0}}, seed);
    case Algorithm::sgd_logistic:
    case Algorithm::linear_svc: return spec(a, {{"epochs", 30.0}}, seed);
    default: return spec(a, {}, seed);
  }
}

std::vector<Algorithm> all_algorithms() {
  auto v = hs::baseline_algorithms();
  v.push_back(Algorithm::naive_bayes);
  v.push_back(Algorithm::constant);
  return v;
}

template <class T>
const T& as(const hs::TrainedModel& m) {
  const auto* p = dynamic_cast<const T*>(&m.classifier());
  REQUIRE(p != nullptr);
  return *p;
}

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d) / std::max({norm(a), norm(b), 1e-12});
}

struct ThreadsGuard {
  explicit ThreadsGuard(const char* n) { setenv("HEARTSTACK_THREADS", n, 1); }
  ~ThreadsGuard() { unsetenv("HEARTSTACK_THREADS"); }
};

}  // namespace

TEST_CASE("algorithm names and standardization flags") {
  CHECK(hs::baseline_algorithms().size() == 10);
  CHECK(hs::baseline_algorithms().front() == Algorithm::xgb_style);
  for (auto a : all_algorithms()) CHECK(hs::parse_algorithm(hs::algorithm_name(a)) == a);
  CHECK_THROWS_AS(hs::parse_algorithm("svm_rbf"), hs::Error);
  for (auto a : {Algorithm::knn, Algorithm::sgd_logistic, Algorithm::linear_svc, Algorithm::mlp}) {
    CHECK(hs::needs_standardization(a));
  }
  for (auto a : {Algorithm::cart, Algorithm::random_forest, Algorithm::extra_trees, Algorithm::gbm,
                 Algorithm::xgb_style, Algorithm::adaboost, Algorithm::naive_bayes}) {
    CHECK_FALSE(hs::needs_standardization(a));
  }
}

TEST_CASE("defaults and hyperparameter validation") {
  CHECK(spec(Algorithm::random_forest).number("n_estimators") == 500);
  CHECK(spec(Algorithm::random_forest).text("criterion") == "entropy");
  CHECK(spec(Algorithm::cart).text("criterion") == "gini");
  CHECK(spec(Algorithm::extra_trees).number("n_estimators") == 500);
  CHECK(spec(Algorithm::xgb_style).number("n_estimators") == 500);
  CHECK(spec(Algorithm::xgb_style).number("lambda") == 1.0);
  CHECK(spec(Algorithm::gbm).number("n_estimators") == 100);
  CHECK(spec(Algorithm::gbm).number("learning_rate") == 0.1);
  CHECK(spec(Algorithm::gbm).number("max_depth") == 3);
  CHECK(spec(Algorithm::adaboost).number("n_estimators") == 50);
  CHECK(spec(Algorithm::knn).number("k") == 9);
  CHECK(spec(Algorithm::mlp).number("hidden") == 16);
  CHECK(spec(Algorithm::naive_bayes).number("var_floor") == 1e-9);

  auto config_error = [](const hs::LearnerSpec& s) {
    try {
      s.validate();
    } catch (const hs::Error& e) {
      return e.category() == hs::ErrorCategory::config;
    }
    return false;
  };
  CHECK(config_error(spec(Algorithm::knn, {{"k", 0.0}})));
  CHECK(config_error(spec(Algorithm::knn, {{"k", 2.5}})));
  CHECK(config_error(spec(Algorithm::knn, {{"neighbours", 3.0}})));
  CHECK(config_error(spec(Algorithm::cart, {{"criterion", std::string("log_loss")}})));
  CHECK(config_error(spec(Algorithm::cart, {{"criterion", 1.0}})));
  CHECK_NOTHROW(spec(Algorithm::cart, {{"criterion", std::string("entropy")}}).validate());

  const auto s = spec(Algorithm::gbm, {{"max_depth", 2.0}}, 7);
  CHECK(hs::spec_from_json(hs::to_json(s)) == s);
}

TEST_CASE("fit rejects single-class data and bad shapes") {
  hs::Matrix x(3, 1, std::vector<double>{1, 2, 3});
  const std::vector<int> ones{1, 1, 1};
  // constant is exempt: it is the hard-wired oracle and fits any labels.
  for (auto a : hs::baseline_algorithms()) CHECK_THROWS_AS(hs::fit(quick(a), x, ones), hs::Error);
  CHECK_THROWS_AS(hs::fit(quick(Algorithm::naive_bayes), x, ones), hs::Error);
  CHECK_NOTHROW(hs::fit(quick(Algorithm::constant), x, ones));
  const std::vector<int> short_labels{0, 1};
  CHECK_THROWS_AS(hs::fit(quick(Algorithm::cart), x, short_labels), hs::Error);
}

TEST_CASE("knn nearest neighbour example") {
  hs::Matrix x(2, 1, std::vector<double>{0, 10});
  const std::vector<int> y{0, 1};
  const auto m = hs::fit(spec(Algorithm::knn, {{"k", 1.0}}), x, y);
  const std::vector<double> q{1.0};
  CHECK(m.predict(q) == 0);
  const std::vector<double> q2{9.0};
  CHECK(m.predict(q2) == 1);
}

TEST_CASE("knn distance ties go to the lower row index") {
  // Mean 0, so standardization keeps the query exactly equidistant.
  hs::Matrix x(4, 1, std::vector<double>{-2, 2, -4, 4});
  const std::vector<int> y{1, 0, 0, 1};
  const auto m = hs::fit(spec(Algorithm::knn, {{"k", 1.0}}), x, y);
  const std::vector<double> q{0.0};
  CHECK(m.predict(q) == 1);
  const auto& knn = as<hs::KnnClassifier>(m);
  const auto z = m.standardizer()->apply(hs::Matrix(1, 1, std::vector<double>{0.0}));
  const auto nn = knn.neighbours(z.row(0));
  REQUIRE(nn.size() == 1);
  CHECK(nn[0] == 0);
}

TEST_CASE("one adaboost round reproduces the separating stump") {
  hs::Matrix x(6, 1, std::vector<double>{1, 2, 3, 7, 8, 9});
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const auto m = hs::fit(spec(Algorithm::adaboost, {{"n_estimators", 1.0}}), x, y);
  const auto& ada = as<hs::AdaBoostClassifier>(m);
  REQUIRE(ada.stumps().size() == 1);
  const auto& root = ada.stumps()[0].nodes()[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold == 5.0);
  for (std::size_t r = 0; r < 6; ++r) CHECK(m.predict(x.row(r)) == y[r]);
}

TEST_CASE("gbm initial margin is the training log-odds") {
  hs::Matrix x(4, 1, std::vector<double>{1, 2, 3, 4});
  const auto balanced = hs::fit(spec(Algorithm::gbm, {{"n_estimators", 1.0}}), x, std::vector<int>{0, 1, 0, 1});
  CHECK(as<hs::BoostedTreesClassifier>(balanced).base_margin() == 0.0);
  const auto skewed = hs::fit(spec(Algorithm::gbm, {{"n_estimators", 1.0}}), x, std::vector<int>{0, 1, 1, 1});
  CHECK(as<hs::BoostedTreesClassifier>(skewed).base_margin() == doctest::Approx(std::log(3.0)));
}

TEST_CASE("xgb leaf weight example") {
  hs::SplitRule rule;
  rule.criterion = hs::Criterion::newton;
  rule.lambda = 1.0;
  CHECK(hs::leaf_value(hs::newton_stats(2.0, 1.0), rule) == -1.0);
}

TEST_CASE("forest of three trees voting 1, 1, 0") {
  auto leaf = [](double p) { return hs::Tree({hs::TreeNode{-1, 0.0, -1, -1, p, {}}}); };
  const hs::ForestClassifier forest({leaf(1.0), leaf(0.9), leaf(0.0)});
  const std::vector<double> row{0.0};
  CHECK(forest.predict_proba(row) == doctest::Approx(2.0 / 3.0));
  CHECK(hs::label_for(forest.predict_proba(row)) == 1);

  // Exact vote ties: higher mean leaf probability wins, then class 0.
  const hs::ForestClassifier tie_one({leaf(0.9), leaf(0.2)});
  CHECK(hs::label_for(tie_one.predict_proba(row)) == 1);
  const hs::ForestClassifier tie_zero({leaf(0.6), leaf(0.0)});
  CHECK(hs::label_for(tie_zero.predict_proba(row)) == 0);
  const hs::ForestClassifier tie_even({leaf(0.75), leaf(0.25)});
  CHECK(hs::label_for(tie_even.predict_proba(row)) == 0);
}

TEST_CASE("naive bayes separates well-spaced clusters") {
  hs::Rng rng(3);
  hs::Matrix x(0, 2);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    const double centre = c == 1 ? 10.0 : -10.0;
    const std::vector<double> r{centre + rng.uniform(-1.5, 1.5), centre + rng.uniform(-1.5, 1.5)};
    x.append_row(r);
    y.push_back(c);
  }
  const auto m = hs::fit(spec(Algorithm::naive_bayes), x, y);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double p = m.predict_proba(x.row(r));
    CHECK((y[r] == 1 ? p : 1.0 - p) > 0.5);
  }
}

TEST_CASE("probability range and threshold consistency for every algorithm") {
  const auto train = hs::testing::synthetic_heart(240, 21);
  const auto probe = hs::testing::synthetic_heart(120, 22, 10);
  hs::Rng rng(4);
  const auto extreme = hs::testing::random_matrix(40, 11, rng, -1e4, 1e4);
  for (auto a : all_algorithms()) {
    CAPTURE(hs::algorithm_name(a));
    const auto m = hs::fit(quick(a), train);
    for (const auto* rows : {&probe.features, &extreme}) {
      const auto p = m.predict_proba(*rows);
      const auto l = m.predict(*rows);
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i] >= 0.0);
        CHECK(p[i] <= 1.0);
        CHECK(l[i] == (p[i] >= 0.5 ? 1 : 0));
        CHECK(m.predict(rows->row(i)) == l[i]);
      }
    }
  }
}

TEST_CASE("schema width mismatch is refused at predict") {
  const auto train = hs::testing::synthetic_heart(60, 1);
  const auto m = hs::fit(quick(Algorithm::cart), train);
  const std::vector<double> short_row(5, 0.0);
  CHECK_THROWS_AS(m.predict_proba(short_row), hs::Error);
}

TEST_CASE("unlimited trees memorize consistent data") {
  hs::Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 20 + rng.below(60);
    const auto x = hs::testing::distinct_rows(n, 4, rng);
    const auto y = hs::testing::random_labels(n, rng);
    const auto cart = hs::fit(spec(Algorithm::cart, {}, rep), x, y);
    const auto et = hs::fit(spec(Algorithm::extra_trees, {{"n_estimators", 15.0}, {"max_features", 4.0}}, rep), x, y);
    CHECK(hs::accuracy(y, cart.predict(x)) == 1.0);
    CHECK(hs::accuracy(y, et.predict(x)) == 1.0);
  }
}

TEST_CASE("forest label is the vote of its trees") {
  const auto train = hs::testing::synthetic_heart(200, 8);
  const auto probe = hs::testing::synthetic_heart(150, 9);
  for (auto a : {Algorithm::random_forest, Algorithm::extra_trees}) {
    const auto m = hs::fit(spec(a, {{"n_estimators", 10.0}}), train);
    const auto& forest = as<hs::ForestClassifier>(m);
    for (std::size_t r = 0; r < probe.size(); ++r) {
      const auto row = probe.features.row(r);
      std::size_t ones = 0;
      double mean = 0.0;
      for (const auto& t : forest.trees()) {
        const double p = t.predict(row);
        ones += p >= 0.5 ? 1 : 0;
        mean += p;
      }
      const std::size_t zeros = forest.trees().size() - ones;
      mean /= static_cast<double>(forest.trees().size());
      int expected = ones > zeros ? 1 : 0;
      if (ones == zeros) expected = mean > 0.5 ? 1 : 0;
      CHECK(m.predict(row) == expected);
    }
  }
}

TEST_CASE("boosting training loss is non-increasing") {
  const auto train = hs::testing::synthetic_heart(250, 10, 5);
  for (auto a : {Algorithm::gbm, Algorithm::xgb_style}) {
    for (double lr : {0.05, 0.1, 0.3}) {
      CAPTURE(hs::algorithm_name(a));
      CAPTURE(lr);
      const auto m = hs::fit(spec(a, {{"n_estimators", 40.0}, {"learning_rate", lr}}), train);
      const auto losses = as<hs::BoostedTreesClassifier>(m).staged_log_loss(train.features, train.target);
      REQUIRE(losses.size() == 41);
      for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] <= losses[i - 1] + 1e-12);
      CHECK(losses.back() < losses.front());
    }
  }
}

TEST_CASE("permutation invariance of cart, knn and naive bayes") {
  const auto ds = hs::testing::synthetic_heart(150, 14);
  hs::Rng rng(5);
  hs::Matrix x = hs::testing::random_matrix(150, 11, rng);
  const auto& y = ds.target;
  std::vector<std::size_t> perm(150);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(perm));
  hs::Matrix px(0, 11);
  std::vector<int> py;
  for (auto i : perm) {
    px.append_row(x.row(i));
    py.push_back(y[i]);
  }
  const auto probe = hs::testing::random_matrix(80, 11, rng);
  for (auto a : {Algorithm::cart, Algorithm::knn, Algorithm::naive_bayes}) {
    CAPTURE(hs::algorithm_name(a));
    const auto m1 = hs::fit(spec(a), x, y);
    const auto m2 = hs::fit(spec(a), px, py);
    const auto p1 = m1.predict_proba(probe);
    const auto p2 = m2.predict_proba(probe);
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
    CHECK(m1.predict(probe) == m2.predict(probe));
  }
}

TEST_CASE("linear objective gradient matches finite differences") {
  hs::Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = hs::testing::random_matrix(15, 5, rng);
    const auto y = hs::testing::random_labels(15, rng);
    std::vector<double> w(5);
    for (auto& v : w) v = rng.uniform(-0.5, 0.5);
    const double b = rng.uniform(-0.5, 0.5);
    const double l2 = 0.01;
    const auto g = hs::linear_objective(hs::LinearLoss::logistic, w, b, x, y, l2);
    std::vector<double> analytic = g.weights;
    analytic.push_back(g.bias);
    std::vector<double> numeric;
    const double h = 1e-5;
    for (std::size_t j = 0; j <= w.size(); ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < w.size()) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double fp = hs::linear_objective(hs::LinearLoss::logistic, wp, bp, x, y, l2).loss;
      const double fm = hs::linear_objective(hs::LinearLoss::logistic, wm, bm, x, y, l2).loss;
      numeric.push_back((fp - fm) / (2 * h));
    }
    CHECK(relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("mlp objective gradient matches finite differences") {
  hs::Rng rng(13);
  for (int rep = 0; rep < 10; ++rep) {
    const auto x = hs::testing::random_matrix(12, 4, rng);
    const auto y = hs::testing::random_labels(12, rng);
    hs::MlpWeights net;
    net.inputs = 4;
    net.hidden = 5;
    std::vector<double> flat(4 * 5 + 5 + 5 + 1);
    for (auto& v : flat) v = rng.uniform(-0.5, 0.5);
    net.w1.resize(20);
    net.b1.resize(5);
    net.w2.resize(5);
    net.assign(flat);
    CHECK(net.flatten() == flat);
    const auto [loss, analytic] = hs::mlp_objective(net, x, y, 0.01);
    std::vector<double> numeric;
    const double h = 1e-5;
    for (std::size_t j = 0; j < flat.size(); ++j) {
      auto up = flat, down = flat;
      up[j] += h;
      down[j] -= h;
      hs::MlpWeights a = net, b = net;
      a.assign(up);
      b.assign(down);
      numeric.push_back((hs::mlp_objective(a, x, y, 0.01).first - hs::mlp_objective(b, x, y, 0.01).first) / (2 * h));
    }
    CHECK(relative_error(analytic, numeric) < 1e-4);
  }
}

TEST_CASE("fits are bit-reproducible for any worker count") {
  const auto train = hs::testing::synthetic_heart(200, 30);
  const auto probe = hs::testing::synthetic_heart(100, 31);
  for (auto a : all_algorithms()) {
    CAPTURE(hs::algorithm_name(a));
    std::vector<std::vector<double>> outputs;
    std::vector<std::string> payloads;
    for (const char* threads : {"1", "3", "8"}) {
      ThreadsGuard guard(threads);
      const auto m = hs::fit(quick(a, 99), train);
      outputs.push_back(m.predict_proba(probe.features));
      payloads.push_back(m.classifier().to_json().dump());
    }
    CHECK(outputs[0] == outputs[1]);
    CHECK(outputs[0] == outputs[2]);
    CHECK(payloads[0] == payloads[1]);
    CHECK(payloads[0] == payloads[2]);
  }
}

TEST_CASE("different seeds change the stochastic learners") {
  const auto train = hs::testing::synthetic_heart(200, 30);
  for (auto a : {Algorithm::random_forest, Algorithm::extra_trees, Algorithm::mlp, Algorithm::sgd_logistic}) {
    const auto m1 = hs::fit(quick(a, 1), train);
    const auto m2 = hs::fit(quick(a, 2), train);
    CHECK(m1.classifier().to_json().dump() != m2.classifier().to_json().dump());
  }
}

TEST_CASE("learners beat the base rate on learnable data") {
  const auto train = hs::testing::synthetic_heart(400, 40);
  const auto test = hs::testing::synthetic_heart(200, 41);
  const auto counts = test.class_counts();
  const double base_rate = static_cast<double>(std::max(counts[0], counts[1])) / static_cast<double>(test.size());
  for (auto a : hs::baseline_algorithms()) {
    CAPTURE(hs::algorithm_name(a));
    const auto m = hs::fit(quick(a), train);
    CHECK(hs::accuracy(test.target, m.predict(test.features)) > base_rate + 0.05);
  }
}
