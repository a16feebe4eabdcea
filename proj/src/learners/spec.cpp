#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "heartstack/error.hpp"
#include "heartstack/learners.hpp"

namespace heartstack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AlgorithmName {
  Algorithm algorithm;
  std::string_view name;
};

constexpr AlgorithmName kNames[] = {
    {Algorithm::cart, "cart"},
    {Algorithm::random_forest, "random_forest"},
    {Algorithm::extra_trees, "extra_trees"},
    {Algorithm::gbm, "gbm"},
    {Algorithm::xgb_style, "xgb_style"},
    {Algorithm::adaboost, "adaboost"},
    {Algorithm::knn, "knn"},
    {Algorithm::naive_bayes, "naive_bayes"},
    {Algorithm::sgd_logistic, "sgd_logistic"},
    {Algorithm::linear_svc, "linear_svc"},
    {Algorithm::mlp, "mlp"},
    {Algorithm::constant, "constant"},
};

ParamDef num(std::string name, double def, double lo, double hi, bool integer = false) {
  return ParamDef{std::move(name), def, lo, hi, integer, {}};
}

ParamDef choice(std::string name, std::string def, std::vector<std::string> choices) {
  return ParamDef{std::move(name), std::move(def), 0.0, 0.0, false, std::move(choices)};
}

// max_depth -1 and max_features 0 mean "unlimited" and "ceil(sqrt(d))".
std::vector<ParamDef> tree_params(const std::string& criterion) {
  return {
      choice("criterion", criterion, {"gini", "entropy"}),
      num("max_depth", -1, -1, 1000, true),
      num("min_samples_split", 2, 2, 1e9, true),
      num("min_samples_leaf", 1, 1, 1e9, true),
  };
}

std::vector<ParamDef> forest_params(const std::string& criterion) {
  auto defs = tree_params(criterion);
  defs.push_back(num("n_estimators", 500, 1, 100000, true));
  defs.push_back(num("max_features", 0, 0, 1e6, true));
  return defs;
}

std::vector<ParamDef> sgd_params() {
  return {
      num("epochs", 200, 1, 1e6, true),
      num("eta0", 0.01, 1e-12, 10.0),
      num("decay", 1e-4, 0.0, 1e3),
      num("l2", 1e-4, 0.0, 1e3),
  };
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  for (const auto& n : kNames) {
    if (n.algorithm == a) return n.name;
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.algorithm;
  }
  fail(ErrorCategory::config, "unknown algorithm '" + std::string(name) + "'");
}

const std::vector<Algorithm>& baseline_algorithms() {
  static const std::vector<Algorithm> all = {
      Algorithm::xgb_style,   Algorithm::extra_trees, Algorithm::random_forest, Algorithm::gbm,
      Algorithm::cart,        Algorithm::mlp,         Algorithm::adaboost,      Algorithm::linear_svc,
      Algorithm::sgd_logistic, Algorithm::knn,
  };
  return all;
}

bool needs_standardization(Algorithm a) {
  return a == Algorithm::knn || a == Algorithm::sgd_logistic || a == Algorithm::linear_svc ||
         a == Algorithm::mlp;
}

const std::vector<ParamDef>& param_defs(Algorithm a) {
  static const std::map<Algorithm, std::vector<ParamDef>> table = [] {
    std::map<Algorithm, std::vector<ParamDef>> t;
    t[Algorithm::cart] = tree_params("gini");
    t[Algorithm::random_forest] = forest_params("entropy");
    t[Algorithm::extra_trees] = forest_params("gini");
    t[Algorithm::gbm] = {
        num("n_estimators", 100, 1, 100000, true),
        num("learning_rate", 0.1, 1e-6, 1.0),
        num("max_depth", 3, 1, 64, true),
        num("min_samples_split", 2, 2, 1e9, true),
        num("min_samples_leaf", 1, 1, 1e9, true),
    };
    t[Algorithm::xgb_style] = {
        num("n_estimators", 500, 1, 100000, true),
        num("learning_rate", 0.1, 1e-6, 1.0),
        num("max_depth", 3, 1, 64, true),
        num("lambda", 1.0, 0.0, 1e6),
        num("gamma", 0.0, 0.0, 1e6),
        num("min_child_weight", 1.0, 0.0, 1e6),
    };
    t[Algorithm::adaboost] = {
        num("n_estimators", 50, 1, 100000, true),
        num("learning_rate", 1.0, 1e-6, 10.0),
    };
    t[Algorithm::knn] = {num("k", 9, 1, 1e6, true)};
    t[Algorithm::naive_bayes] = {num("var_floor", 1e-9, 1e-300, 1e6)};
    t[Algorithm::sgd_logistic] = sgd_params();
    t[Algorithm::linear_svc] = sgd_params();
    t[Algorithm::mlp] = {
        num("hidden", 16, 1, 4096, true),
        num("epochs", 500, 1, 1e6, true),
        num("learning_rate", 0.01, 1e-9, 10.0),
        num("momentum", 0.9, 0.0, 0.999),
        num("l2", 1e-4, 0.0, 1e3),
    };
    t[Algorithm::constant] = {num("class", 1, 0, 1, true)};
    return t;
  }();
  return table.at(a);
}

std::string to_string(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  std::ostringstream out;
  out.precision(17);
  out << std::get<double>(v);
  return out.str();
}

json to_json(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  const double d = std::get<double>(v);
  if (d == std::floor(d) && std::abs(d) < 1e15) return static_cast<long long>(d);
  return d;
}

ParamValue param_from_json(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.get<double>();
  fail(ErrorCategory::config, "hyperparameter values must be numbers or strings, got " + j.dump());
}

void LearnerSpec::validate() const { (void)resolved(); }

Hyperparams LearnerSpec::resolved() const {
  const auto& defs = param_defs(algorithm);
  const std::string algo(algorithm_name(algorithm));
  for (const auto& [name, value] : hyperparameters) {
    auto it = std::find_if(defs.begin(), defs.end(), [&](const ParamDef& d) { return d.name == name; });
    if (it == defs.end()) fail(ErrorCategory::config, algo + ": unknown hyperparameter '" + name + "'");
    if (!it->choices.empty()) {
      const auto* s = std::get_if<std::string>(&value);
      if (s == nullptr || std::find(it->choices.begin(), it->choices.end(), *s) == it->choices.end()) {
        fail(ErrorCategory::config, algo + ": invalid value '" + to_string(value) + "' for " + name);
      }
      continue;
    }
    const auto* d = std::get_if<double>(&value);
    if (d == nullptr || !std::isfinite(*d)) {
      fail(ErrorCategory::config, algo + ": " + name + " must be numeric");
    }
    if (*d < it->min || *d > it->max || (it->integer && *d != std::floor(*d))) {
      fail(ErrorCategory::config, algo + ": " + name + " = " + to_string(value) + " out of range");
    }
  }
  Hyperparams out;
  for (const auto& d : defs) out[d.name] = d.default_value;
  for (const auto& [name, value] : hyperparameters) out[name] = value;
  return out;
}

double LearnerSpec::number(const std::string& name) const {
  auto params = resolved();
  auto it = params.find(name);
  if (it == params.end() || !std::holds_alternative<double>(it->second)) {
    fail(ErrorCategory::config, std::string(algorithm_name(algorithm)) + ": no numeric parameter " + name);
  }
  return std::get<double>(it->second);
}

std::string LearnerSpec::text(const std::string& name) const {
  auto params = resolved();
  auto it = params.find(name);
  if (it == params.end() || !std::holds_alternative<std::string>(it->second)) {
    fail(ErrorCategory::config, std::string(algorithm_name(algorithm)) + ": no string parameter " + name);
  }
  return std::get<std::string>(it->second);
}

json to_json(const LearnerSpec& spec) {
  json params = json::object();
  for (const auto& [name, value] : spec.hyperparameters) params[name] = to_json(value);
  return json{{"algorithm", std::string(algorithm_name(spec.algorithm))},
              {"hyperparameters", params},
              {"seed", spec.seed}};
}

LearnerSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("algorithm")) {
    fail(ErrorCategory::config, "learner spec needs an 'algorithm' field: " + j.dump());
  }
  LearnerSpec spec;
  spec.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  if (j.contains("hyperparameters")) {
    for (const auto& [name, value] : j.at("hyperparameters").items()) {
      spec.hyperparameters[name] = param_from_json(value);
    }
  }
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  spec.validate();
  return spec;
}

}  // namespace heartstack
