#pragma once

// Binary confusion-matrix metrics, ROC and precision-recall curves.
// The positive class is 1 throughout.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heartstack {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred);

/// A metric value, or nullopt when its denominator is zero.
using Metric = std::optional<double>;

struct MetricReport {
  Metric sensitivity;
  Metric specificity;
  Metric accuracy;
  Metric precision;
  Metric f1;
  Metric mcc;
  /// Single-threshold (sensitivity + specificity) / 2; distinct from the
  /// trapezoidal area under the ROC curve.
  Metric balanced_auc;
};

MetricReport metric_report(const ConfusionMatrix& cm);

/// Formats a metric as a percentage with two decimals, or "undefined".
std::string format_percent(const Metric& m);

struct CurvePoint {
  double x = 0.0;  // fpr (ROC) or recall (PR)
  double y = 0.0;  // tpr (ROC) or precision (PR)
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<CurvePoint> points;  // (0,0) ... (1,1)
  double area = 0.0;
};

struct PrCurve {
  std::vector<CurvePoint> points;  // descending threshold; starts at recall 0, precision 1
  double average_precision = 0.0;
};

/// Thresholds sweep the distinct scores in descending order; tied scores
/// collapse into a single point. Area by the trapezoidal rule.
RocCurve roc_curve(std::span<const int> y_true, std::span<const double> scores);

/// Average precision = sum over steps of (R_i - R_{i-1}) * P_i.
PrCurve pr_curve(std::span<const int> y_true, std::span<const double> scores);

}  // namespace heartstack
