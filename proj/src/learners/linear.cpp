#include <cmath>
#include <numeric>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/kernels.hpp"

namespace heartstack {

namespace {

// Adds scale * d loss(y, margin) / d (w, b) for one row into (gw, gb) and
// returns the row's loss.
double accumulate_row(LinearLoss loss, std::span<const double> row, int label, double margin, double scale,
                      std::span<double> gw, double& gb) {
  if (loss == LinearLoss::logistic) {
    const double g = sigmoid(margin) - label;
    kernels::axpy(scale * g, row, gw);
    gb += scale * g;
    const double m = label == 1 ? margin : -margin;
    return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
  }
  const double s = label == 1 ? 1.0 : -1.0;
  const double slack = 1.0 - s * margin;
  if (slack > 0.0) {
    kernels::axpy(-scale * s, row, gw);
    gb += -scale * s;
    return slack;
  }
  return 0.0;
}

}  // namespace

LinearGradient linear_objective(LinearLoss loss, std::span<const double> w, double b, const Matrix& x,
                                std::span<const int> y, double l2) {
  LinearGradient out;
  out.weights.assign(w.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(x.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double margin = kernels::dot(w, x.row(i)) + b;
    total += accumulate_row(loss, x.row(i), y[i], margin, scale, out.weights, out.bias);
  }
  kernels::axpy(l2, w, out.weights);
  out.loss = total * scale + 0.5 * l2 * kernels::dot(w, w);
  return out;
}

// Per-example (sub)gradient steps on the regularized objective with
// eta_t = eta0 / (1 + decay * t); every epoch visits the rows in a fresh
// order drawn from that epoch's RNG stream.
std::shared_ptr<const Classifier> train_linear(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  const LinearLoss loss = spec.algorithm == Algorithm::linear_svc ? LinearLoss::hinge : LinearLoss::logistic;
  const auto epochs = static_cast<std::size_t>(spec.number("epochs"));
  const double eta0 = spec.number("eta0");
  const double decay = spec.number("decay");
  const double l2 = spec.number("l2");

  const std::size_t n = x.rows();
  std::vector<double> w(x.cols(), 0.0);
  double b = 0.0;
  std::vector<double> gw(x.cols());
  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = Rng::stream(spec.seed, epoch);
    rng.shuffle(std::span(order));
    for (auto i : order) {
      const double eta = eta0 / (1.0 + decay * static_cast<double>(step++));
      std::fill(gw.begin(), gw.end(), 0.0);
      double gb = 0.0;
      const double margin = kernels::dot(w, x.row(i)) + b;
      accumulate_row(loss, x.row(i), y[i], margin, 1.0, gw, gb);
      kernels::axpy(l2, w, gw);
      kernels::axpy(-eta, gw, w);
      b -= eta * gb;
    }
  }
  return std::make_shared<LinearClassifier>(std::move(w), b);
}

double LinearClassifier::margin(std::span<const double> row) const { return kernels::dot(weights_, row) + bias_; }

json LinearClassifier::to_json() const { return json{{"weights", weights_}, {"bias", bias_}}; }

std::size_t LinearClassifier::required_width() const { return weights_.size(); }

std::shared_ptr<const Classifier> LinearClassifier::from_json(const json& j) {
  auto w = j.at("weights").get<std::vector<double>>();
  if (w.empty()) fail(ErrorCategory::model, "linear payload has no weights");
  return std::make_shared<LinearClassifier>(std::move(w), j.at("bias").get<double>());
}

}  // namespace heartstack
