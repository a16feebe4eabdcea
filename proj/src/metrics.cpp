#include "heartstack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "heartstack/error.hpp"

namespace heartstack {

namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

void check_binary(std::span<const int> labels) {
  for (int v : labels) {
    if (v != 0 && v != 1) fail(ErrorCategory::data, "labels must be 0 or 1, got " + std::to_string(v));
  }
}

struct Sweep {
  std::vector<double> thresholds;
  std::vector<std::size_t> tp;  // cumulative at each threshold
  std::vector<std::size_t> fp;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

Sweep sweep(std::span<const int> y_true, std::span<const double> scores) {
  if (y_true.size() != scores.size() || y_true.empty()) {
    fail(ErrorCategory::data, "curve needs equal-length, non-empty labels and scores");
  }
  check_binary(y_true);
  for (double v : scores) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCategory::data, "scores must be probabilities in [0, 1]");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  Sweep s;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (y_true[order[i]] == 1 ? tp : fp) += 1;
    const bool last_of_tie = i + 1 == order.size() || scores[order[i + 1]] != scores[order[i]];
    if (last_of_tie) {
      s.thresholds.push_back(scores[order[i]]);
      s.tp.push_back(tp);
      s.fp.push_back(fp);
    }
  }
  s.positives = tp;
  s.negatives = fp;
  return s;
}

}  // namespace

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) fail(ErrorCategory::data, "label vectors differ in length");
  if (y_true.empty()) fail(ErrorCategory::data, "confusion matrix needs at least one row");
  check_binary(y_true);
  check_binary(y_pred);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) {
      (y_pred[i] == 1 ? cm.tp : cm.fn) += 1;
    } else {
      (y_pred[i] == 1 ? cm.fp : cm.tn) += 1;
    }
  }
  return cm;
}

MetricReport metric_report(const ConfusionMatrix& cm) {
  const auto tp = static_cast<double>(cm.tp);
  const auto tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn);

  MetricReport r;
  r.sensitivity = ratio(tp, tp + fn);
  r.specificity = ratio(tn, tn + fp);
  r.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  r.precision = ratio(tp, tp + fp);
  if (r.precision && r.sensitivity) {
    r.f1 = ratio(2.0 * *r.precision * *r.sensitivity, *r.precision + *r.sensitivity);
  }
  const double den = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn));
  r.mcc = ratio(tp * tn - fp * fn, den);
  if (r.mcc) r.mcc = std::clamp(*r.mcc, -1.0, 1.0);
  if (r.sensitivity && r.specificity) r.balanced_auc = 0.5 * (*r.sensitivity + *r.specificity);
  return r;
}

std::string format_percent(const Metric& m) {
  if (!m) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * *m);
  return buf;
}

RocCurve roc_curve(std::span<const int> y_true, std::span<const double> scores) {
  const Sweep s = sweep(y_true, scores);
  if (s.positives == 0 || s.negatives == 0) {
    fail(ErrorCategory::data, "ROC curve needs both classes in y_true");
  }
  RocCurve roc;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  const auto P = static_cast<double>(s.positives);
  const auto N = static_cast<double>(s.negatives);
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    roc.points.push_back({static_cast<double>(s.fp[i]) / N, static_cast<double>(s.tp[i]) / P, s.thresholds[i]});
  }
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    roc.area += (b.x - a.x) * (a.y + b.y) / 2.0;
  }
  return roc;
}

PrCurve pr_curve(std::span<const int> y_true, std::span<const double> scores) {
  const Sweep s = sweep(y_true, scores);
  if (s.positives == 0) fail(ErrorCategory::data, "precision-recall curve needs at least one positive");
  PrCurve pr;
  pr.points.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
  const auto P = static_cast<double>(s.positives);
  double previous_recall = 0.0;
  for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
    const double recall = static_cast<double>(s.tp[i]) / P;
    const double precision = static_cast<double>(s.tp[i]) / static_cast<double>(s.tp[i] + s.fp[i]);
    pr.points.push_back({recall, precision, s.thresholds[i]});
    pr.average_precision += (recall - previous_recall) * precision;
    previous_recall = recall;
  }
  return pr;
}

}  // namespace heartstack
