#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/kernels.hpp"

namespace heartstack {

std::shared_ptr<const Classifier> train_knn(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  const auto k = static_cast<std::size_t>(spec.number("k"));
  if (k > x.rows()) {
    fail(ErrorCategory::config, "knn: k = " + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) +
                                    " training rows");
  }
  return std::make_shared<KnnClassifier>(x, std::vector<int>(y.begin(), y.end()), k);
}

std::vector<std::size_t> KnnClassifier::neighbours(std::span<const double> row) const {
  std::vector<std::pair<double, std::size_t>> dist(rows_.rows());
  for (std::size_t i = 0; i < rows_.rows(); ++i) dist[i] = {kernels::squared_distance(rows_.row(i), row), i};
  const std::size_t k = std::min(k_, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

double KnnClassifier::predict_proba(std::span<const double> row) const {
  const auto nn = neighbours(row);
  std::size_t positives = 0;
  for (auto i : nn) positives += labels_[i] == 1;
  return static_cast<double>(positives) / static_cast<double>(nn.size());
}

json KnnClassifier::to_json() const {
  return json{{"k", k_},
              {"cols", rows_.cols()},
              {"rows", std::vector<double>(rows_.values().begin(), rows_.values().end())},
              {"labels", labels_}};
}

std::size_t KnnClassifier::required_width() const { return rows_.cols(); }

std::shared_ptr<const Classifier> KnnClassifier::from_json(const json& j) {
  const auto cols = j.at("cols").get<std::size_t>();
  auto values = j.at("rows").get<std::vector<double>>();
  auto labels = j.at("labels").get<std::vector<int>>();
  const auto k = j.at("k").get<std::size_t>();
  if (cols == 0 || values.size() != cols * labels.size() || k == 0 || k > labels.size()) {
    fail(ErrorCategory::model, "knn payload is inconsistent");
  }
  const std::size_t n = labels.size();
  return std::make_shared<KnnClassifier>(Matrix(n, cols, std::move(values)), std::move(labels), k);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Classifier> train_naive_bayes(const LearnerSpec& spec, const Matrix& x,
                                                    std::span<const int> y) {
  const double floor = spec.number("var_floor");
  const std::size_t d = x.cols();
  std::array<GaussianNbClassifier::ClassStats, 2> classes;
  std::array<std::size_t, 2> counts{};
  for (int label : y) ++counts[label];
  for (int c = 0; c < 2; ++c) {
    auto& s = classes[c];
    s.mean.assign(d, 0.0);
    s.variance.assign(d, 0.0);
    s.log_prior = std::log(static_cast<double>(counts[c]) / static_cast<double>(y.size()));
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (y[i] != c) continue;
      for (std::size_t f = 0; f < d; ++f) s.mean[f] += x(i, f);
    }
    for (auto& m : s.mean) m /= static_cast<double>(counts[c]);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (y[i] != c) continue;
      for (std::size_t f = 0; f < d; ++f) {
        const double dv = x(i, f) - s.mean[f];
        s.variance[f] += dv * dv;
      }
    }
    for (auto& v : s.variance) v = std::max(v / static_cast<double>(counts[c]), floor);
  }
  return std::make_shared<GaussianNbClassifier>(std::move(classes));
}

double GaussianNbClassifier::log_joint(std::span<const double> row, int cls) const {
  const auto& s = classes_[cls];
  double lp = s.log_prior;
  for (std::size_t f = 0; f < s.mean.size(); ++f) {
    const double dv = row[f] - s.mean[f];
    lp -= 0.5 * (std::log(2.0 * std::numbers::pi * s.variance[f]) + dv * dv / s.variance[f]);
  }
  return lp;
}

double GaussianNbClassifier::predict_proba(std::span<const double> row) const {
  // p1 = 1 / (1 + exp(l0 - l1))
  return sigmoid(log_joint(row, 1) - log_joint(row, 0));
}

json GaussianNbClassifier::to_json() const {
  json classes = json::array();
  for (const auto& s : classes_) {
    classes.push_back(json{{"log_prior", s.log_prior}, {"mean", s.mean}, {"variance", s.variance}});
  }
  return json{{"classes", classes}};
}

std::size_t GaussianNbClassifier::required_width() const { return classes_[0].mean.size(); }

std::shared_ptr<const Classifier> GaussianNbClassifier::from_json(const json& j) {
  const auto& arr = j.at("classes");
  if (arr.size() != 2) fail(ErrorCategory::model, "naive bayes payload needs two classes");
  std::array<ClassStats, 2> classes;
  for (int c = 0; c < 2; ++c) {
    classes[c].log_prior = arr[c].at("log_prior").get<double>();
    classes[c].mean = arr[c].at("mean").get<std::vector<double>>();
    classes[c].variance = arr[c].at("variance").get<std::vector<double>>();
    if (classes[c].mean.size() != classes[c].variance.size() ||
        classes[c].mean.size() != classes[0].mean.size() ||
        std::any_of(classes[c].variance.begin(), classes[c].variance.end(), [](double v) { return !(v > 0.0); })) {
      fail(ErrorCategory::model, "naive bayes payload is inconsistent");
    }
  }
  return std::make_shared<GaussianNbClassifier>(std::move(classes));
}

}  // namespace heartstack
