#include <cmath>

#include "heartstack/classifiers.hpp"
#include "heartstack/error.hpp"
#include "heartstack/kernels.hpp"

namespace heartstack {

std::vector<double> MlpWeights::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.begin(), w1.end());
  flat.insert(flat.end(), b1.begin(), b1.end());
  flat.insert(flat.end(), w2.begin(), w2.end());
  flat.push_back(b2);
  return flat;
}

void MlpWeights::assign(std::span<const double> flat) {
  auto it = flat.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(w1.size()), w1.begin());
  it += static_cast<std::ptrdiff_t>(w1.size());
  std::copy(it, it + static_cast<std::ptrdiff_t>(b1.size()), b1.begin());
  it += static_cast<std::ptrdiff_t>(b1.size());
  std::copy(it, it + static_cast<std::ptrdiff_t>(w2.size()), w2.begin());
  it += static_cast<std::ptrdiff_t>(w2.size());
  b2 = *it;
}

double mlp_margin(const MlpWeights& net, std::span<const double> row, std::span<double> hidden) {
  for (std::size_t h = 0; h < net.hidden; ++h) {
    std::span<const double> weights(net.w1.data() + h * net.inputs, net.inputs);
    hidden[h] = std::tanh(kernels::dot(weights, row) + net.b1[h]);
  }
  return kernels::dot(net.w2, hidden.first(net.hidden)) + net.b2;
}

std::pair<double, std::vector<double>> mlp_objective(const MlpWeights& net, const Matrix& x, std::span<const int> y,
                                                     double l2) {
  const std::size_t n = x.rows();
  const double scale = 1.0 / static_cast<double>(n);
  MlpWeights grad = net;
  std::fill(grad.w1.begin(), grad.w1.end(), 0.0);
  std::fill(grad.b1.begin(), grad.b1.end(), 0.0);
  std::fill(grad.w2.begin(), grad.w2.end(), 0.0);
  grad.b2 = 0.0;

  std::vector<double> hidden(net.hidden);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    const double margin = mlp_margin(net, row, hidden);
    const double m = y[i] == 1 ? margin : -margin;
    total += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));

    const double d_out = (sigmoid(margin) - y[i]) * scale;
    kernels::axpy(d_out, hidden, grad.w2);
    grad.b2 += d_out;
    for (std::size_t h = 0; h < net.hidden; ++h) {
      const double d_hidden = d_out * net.w2[h] * (1.0 - hidden[h] * hidden[h]);
      std::span<double> g_row(grad.w1.data() + h * net.inputs, net.inputs);
      kernels::axpy(d_hidden, row, g_row);
      grad.b1[h] += d_hidden;
    }
  }
  kernels::axpy(l2, net.w1, grad.w1);
  kernels::axpy(l2, net.w2, grad.w2);
  const double penalty = 0.5 * l2 * (kernels::dot(net.w1, net.w1) + kernels::dot(net.w2, net.w2));
  return {total * scale + penalty, grad.flatten()};
}

// Full-batch gradient descent with classical momentum; Glorot-uniform
// initialisation from the learner seed, zero biases.
std::shared_ptr<const Classifier> train_mlp(const LearnerSpec& spec, const Matrix& x, std::span<const int> y) {
  MlpWeights net;
  net.inputs = x.cols();
  net.hidden = static_cast<std::size_t>(spec.number("hidden"));
  const auto epochs = static_cast<std::size_t>(spec.number("epochs"));
  const double lr = spec.number("learning_rate");
  const double momentum = spec.number("momentum");
  const double l2 = spec.number("l2");

  Rng rng(spec.seed);
  const double limit1 = std::sqrt(6.0 / static_cast<double>(net.inputs + net.hidden));
  const double limit2 = std::sqrt(6.0 / static_cast<double>(net.hidden + 1));
  net.w1.resize(net.hidden * net.inputs);
  for (auto& w : net.w1) w = rng.uniform(-limit1, limit1);
  net.b1.assign(net.hidden, 0.0);
  net.w2.resize(net.hidden);
  for (auto& w : net.w2) w = rng.uniform(-limit2, limit2);
  net.b2 = 0.0;

  std::vector<double> params = net.flatten();
  std::vector<double> velocity(params.size(), 0.0);
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    auto [loss, grad] = mlp_objective(net, x, y, l2);
    (void)loss;
    for (std::size_t p = 0; p < params.size(); ++p) {
      velocity[p] = momentum * velocity[p] - lr * grad[p];
      params[p] += velocity[p];
    }
    net.assign(params);
  }
  return std::make_shared<MlpClassifier>(std::move(net));
}

double MlpClassifier::predict_proba(std::span<const double> row) const {
  std::vector<double> hidden(net_.hidden);
  return sigmoid(mlp_margin(net_, row, hidden));
}

json MlpClassifier::to_json() const {
  return json{{"inputs", net_.inputs}, {"hidden", net_.hidden}, {"w1", net_.w1},
              {"b1", net_.b1},         {"w2", net_.w2},         {"b2", net_.b2}};
}

std::size_t MlpClassifier::required_width() const { return net_.inputs; }

std::shared_ptr<const Classifier> MlpClassifier::from_json(const json& j) {
  MlpWeights net;
  net.inputs = j.at("inputs").get<std::size_t>();
  net.hidden = j.at("hidden").get<std::size_t>();
  net.w1 = j.at("w1").get<std::vector<double>>();
  net.b1 = j.at("b1").get<std::vector<double>>();
  net.w2 = j.at("w2").get<std::vector<double>>();
  net.b2 = j.at("b2").get<double>();
  if (net.inputs == 0 || net.hidden == 0 || net.w1.size() != net.inputs * net.hidden ||
      net.b1.size() != net.hidden || net.w2.size() != net.hidden) {
    fail(ErrorCategory::model, "mlp payload has inconsistent shapes");
  }
  return std::make_shared<MlpClassifier>(std::move(net));
}

}  // namespace heartstack
