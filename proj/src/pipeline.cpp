#include "heartstack/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "heartstack/error.hpp"

namespace heartstack {
namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json metric_json(const Metric& m) { return m ? json(*m) : json(nullptr); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCategory::io, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorCategory::io, "failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json grid_json(const Grid& grid) {
  json dims = json::array();
  for (const auto& d : grid) {
    json values = json::array();
    for (const auto& v : d.values) values.push_back(to_json(v));
    dims.push_back(json{{"name", d.name}, {"values", values}});
  }
  return dims;
}

Grid grid_from_json(const json& j) {
  Grid grid;
  for (const auto& d : j) {
    GridDimension dim{d.at("name").get<std::string>(), {}};
    for (const auto& v : d.at("values")) dim.values.push_back(param_from_json(v));
    grid.push_back(std::move(dim));
  }
  return grid;
}

json issue_rows(const std::vector<SchemaIssue>& issues) {
  json out = json::array();
  for (const auto& i : issues) {
    out.push_back(json{{"row", i.row}, {"column", i.column}, {"value", i.value}, {"message", i.message}});
  }
  return out;
}

json validation_json(const ValidationReport& r) {
  return json{{"valid", r.valid()}, {"violations", issue_rows(r.violations)}, {"warnings", issue_rows(r.warnings)}};
}

json cleaning_json(const CleaningReport& r) {
  return json{{"strategy", r.strategy},
              {"rows_input", r.rows_input},
              {"rows_removed", r.rows_removed},
              {"rows_output", r.rows_input - r.rows_removed},
              {"removal_reasons", r.removal_reasons},
              {"removed_rows", r.removed_rows}};
}

std::vector<LearnerSpec> specs_of(const std::vector<TunedCandidate>& tuned) {
  std::vector<LearnerSpec> specs;
  for (const auto& t : tuned) specs.push_back(t.spec);
  return specs;
}

std::string curve_csv(const char* xname, const char* yname, const std::vector<CurvePoint>& points) {
  std::string s = std::string(xname) + "," + yname + "\n";
  for (const auto& p : points) s += num(p.x) + "," + num(p.y) + "\n";
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
  if (dataset.empty()) fail(ErrorCategory::config, "dataset path is empty");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    fail(ErrorCategory::config, "split_fraction must lie strictly between 0 and 1");
  }
  if (folds < 2) fail(ErrorCategory::config, "folds must be at least 2");
  if (candidates.empty()) fail(ErrorCategory::config, "at least one candidate is required");
  for (const auto& c : candidates) {
    c.spec.validate();
    for (const auto& d : c.grid) {
      if (d.values.empty()) fail(ErrorCategory::config, "grid dimension '" + d.name + "' has no values");
      for (const auto& v : d.values) {
        LearnerSpec probe = c.spec;
        probe.hyperparameters[d.name] = v;
        probe.validate();
      }
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (candidates[i].spec.algorithm == candidates[j].spec.algorithm) {
        fail(ErrorCategory::config,
             "candidate '" + std::string(algorithm_name(candidates[i].spec.algorithm)) + "' is listed twice");
      }
    }
  }
  if (top_n == 0 || top_n > candidates.size()) {
    fail(ErrorCategory::config, "top_n must be between 1 and the number of candidates");
  }
  meta_spec.validate();
  if (output_dir.empty()) fail(ErrorCategory::config, "output_dir is empty");
}

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  for (auto& c : candidates) c.spec.seed = s;
  meta_spec.seed = s;
}

StackingConfig PipelineConfig::stacking(std::vector<LearnerSpec> candidate_specs) const {
  StackingConfig sc;
  sc.candidate_specs = std::move(candidate_specs);
  sc.top_n = top_n;
  sc.meta_spec = meta_spec;
  sc.oof_folds = folds;
  sc.seed = seed;
  return sc;
}

PipelineConfig PipelineConfig::paper_defaults() {
  PipelineConfig c;
  auto grid_of = [](const char* name, std::vector<double> values) {
    GridDimension d{name, {}};
    for (double v : values) d.values.emplace_back(v);
    return Grid{d};
  };
  for (Algorithm a : baseline_algorithms()) {
    CandidateConfig cand{LearnerSpec{a, {}, c.seed}, {}};
    if (a == Algorithm::xgb_style) cand.grid = grid_of("n_estimators", {100, 500, 1000, 2000});
    if (a == Algorithm::extra_trees) cand.grid = grid_of("n_estimators", {100, 500, 1000});
    if (a == Algorithm::knn) cand.grid = grid_of("k", {3, 5, 7, 9, 11});
    c.candidates.push_back(std::move(cand));
  }
  return c;
}

json to_json(const PipelineConfig& config) {
  json candidates = json::array();
  for (const auto& c : config.candidates) {
    json j = to_json(c.spec);
    j["grid"] = grid_json(c.grid);
    candidates.push_back(j);
  }
  return json{{"dataset", config.dataset.string()},
              {"cleaning", config.cleaning.name()},
              {"split_fraction", config.split_fraction},
              {"seed", config.seed},
              {"folds", config.folds},
              {"candidates", candidates},
              {"stacking", json{{"top_n", config.top_n}, {"meta", to_json(config.meta_spec)}}},
              {"output_dir", config.output_dir.string()}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c = PipelineConfig::paper_defaults();
  try {
    if (!j.is_object()) fail(ErrorCategory::config, "config must be a JSON object");
    static const std::vector<std::string> known = {"dataset", "cleaning",   "split_fraction", "seed",
                                                   "folds",   "candidates", "stacking",       "output_dir"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        fail(ErrorCategory::config, "unknown config key '" + key + "'");
      }
    }
    if (j.contains("dataset")) c.dataset = j.at("dataset").get<std::string>();
    if (j.contains("cleaning")) c.cleaning = CleaningStrategy::parse(j.at("cleaning").get<std::string>());
    if (j.contains("split_fraction")) c.split_fraction = j.at("split_fraction").get<double>();
    if (j.contains("folds")) c.folds = j.at("folds").get<std::size_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("candidates")) {
      c.candidates.clear();
      for (const auto& cj : j.at("candidates")) {
        CandidateConfig cand{spec_from_json(cj), {}};
        if (cj.contains("grid")) cand.grid = grid_from_json(cj.at("grid"));
        c.candidates.push_back(std::move(cand));
      }
    }
    if (j.contains("stacking")) {
      const json& s = j.at("stacking");
      if (s.contains("top_n")) c.top_n = s.at("top_n").get<std::size_t>();
      if (s.contains("meta")) c.meta_spec = spec_from_json(s.at("meta"));
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorCategory::config, std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_pipeline_config(const std::string& name_or_path) {
  if (name_or_path == "paper-defaults") return PipelineConfig::paper_defaults();
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) fail(ErrorCategory::config, "cannot open config file " + name_or_path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::config, "config file " + name_or_path + " is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j);
}

PreparedData prepare_data(const PipelineConfig& config) {
  config.validate();
  PreparedData d;
  d.raw = parse_csv_file(config.dataset);
  d.validation = validate_schema(d.raw);
  if (!d.validation.valid()) {
    const auto& v = d.validation.violations.front();
    fail(ErrorCategory::data, std::to_string(d.validation.violations.size()) +
                                  " schema violation(s); first at row " + std::to_string(v.row + 1) + ", column " +
                                  v.column + ": " + v.message);
  }
  d.cleaned = clean(d.raw, config.cleaning);
  d.split = stratified_split(d.cleaned.dataset, config.split_fraction, config.seed);
  return d;
}

// ---------------------------------------------------------------------------

std::vector<TunedCandidate> tune_candidates(const PipelineConfig& config, const Dataset& train) {
  const FoldPlan plan = k_fold_plan(train.size(), config.folds, config.seed, train.target);
  std::vector<TunedCandidate> tuned;
  for (const auto& c : config.candidates) {
    TunedCandidate t;
    if (c.grid.empty()) {
      t.spec = c.spec;
      t.cv = cross_validate(c.spec, train, plan);
    } else {
      GridSearchResult g = grid_search(c.spec, c.grid, train, plan);
      t.spec = g.best_spec;
      t.cv = std::move(g.best_cv);
      g.best_cv = {};
      t.grid = std::move(g);
    }
    tuned.push_back(std::move(t));
  }
  return tuned;
}

const BaselineRow* BaselineResult::find(Algorithm a) const {
  for (const auto& r : rows) {
    if (r.tuned.spec.algorithm == a) return &r;
  }
  return nullptr;
}

const std::vector<LiteratureEntry>& literature_table() {
  static const std::vector<LiteratureEntry> table = {
      {1, "Modak et al.(2022)", "Multilayer perceptron",
       "Cleveland, Hungarian, Switzerland, Long Beach, and Statlog", "87.70%"},
      {2, "Sarah et al.(2022)", "Logistic regression", "Cleveland", "85.25%"},
      {3, "Nguyen et al. (2021)", "Naive Bayes, Logistic Regression, SVM and Decision Trees", "Cleveland", "83.5%"},
      {4, "Latha et al. (2019)", "Random Forest, Multilayer Perceptron, Bayes Net Naïve Bayes", "Cleveland",
       "84.49%"},
      {5, "Atallah et al. (2019)",
       "(SGD)Classifier, K-Nearest Neighbor Classifier, Random Forest Classifier, Logistic Regression Classifier",
       "Cleveland", "90%"},
      {6, "Pawlovsky (2018)", "Weighted k-nearest neighbour", "Cleveland", "84.83%"},
      {7, "Bialy et al. (2016)", "Ensemble of FDT,C4.5, MLP, SVM, and Naive Bayes", "Cleveland", "85.30%"},
      {8, "Miao et al. (2016)", "Adaptive boosting", "UCI Repository", "80.14%"},
      {9, "Bashir et al. (2014)", "Memory-based learner, DT-IG,DT-GI, Ensemble of Naive Bayes, and SVM",
       "UCI Repository, ricco database", "88.52%"},
      {10, "Detrano et al. (1989)", "Logistic regression-based discriminant function", "Cleveland", "77.00%"},
  };
  return table;
}

// ---------------------------------------------------------------------------

void cmd_analyze(const PipelineConfig& config) {
  config.validate();
  const fs::path dir = config.output_dir / "analysis";
  ensure_dir(dir);
  const Dataset raw = parse_csv_file(config.dataset);
  const ValidationReport validation = validate_schema(raw);
  write_json(dir / "validation.json", validation_json(validation));
  if (!validation.valid()) {
    fail(ErrorCategory::data, std::to_string(validation.violations.size()) +
                                  " schema violation(s); see " + (dir / "validation.json").string());
  }

  const CleanResult cleaned = clean(raw, config.cleaning);
  write_json(dir / "cleaning.json", cleaning_json(cleaned.report));

  // Descriptive statistics and correlations describe the data as shipped,
  // before outlier removal.
  const SummaryReport summary = summarize(raw);
  json nominal = json::object();
  std::string grouped = "attribute,code,count_target0,count_target1\n";
  for (const auto& [attr, codes] : summary.nominal_counts) {
    json per = json::object();
    for (const auto& [code, counts] : codes) {
      per[std::to_string(code)] = {counts[0], counts[1]};
      grouped += attr + "," + std::to_string(code) + "," + std::to_string(counts[0]) + "," +
                 std::to_string(counts[1]) + "\n";
    }
    nominal[attr] = per;
  }
  json slope = json::array();
  std::string slope_csv = "age_decade,st_slope,count_target0,count_target1\n";
  for (const auto& [key, counts] : summary.slope_by_age_decade) {
    slope.push_back(json{{"age_decade", key.first}, {"st_slope", key.second}, {"counts", {counts[0], counts[1]}}});
    slope_csv += std::to_string(key.first) + "," + std::to_string(key.second) + "," + std::to_string(counts[0]) +
                 "," + std::to_string(counts[1]) + "\n";
  }
  std::string hist_csv = "attribute,bin,lower,upper,count_target0,count_target1\n";
  json hists = json::array();
  for (const auto& h : summary.histograms) {
    hists.push_back(json{{"attribute", h.attribute}, {"min", h.min}, {"max", h.max}, {"bin_width", h.bin_width}});
    for (std::size_t b = 0; b < h.bins.size(); ++b) {
      const double lo = h.min + static_cast<double>(b) * h.bin_width;
      const double hi = b + 1 == h.bins.size() ? h.max : lo + h.bin_width;
      hist_csv += h.attribute + "," + std::to_string(b) + "," + num(lo) + "," + num(hi) + "," +
                  std::to_string(h.bins[b][0]) + "," + std::to_string(h.bins[b][1]) + "\n";
    }
  }
  write_json(dir / "summary.json", json{{"n", summary.n},
                                        {"class_counts", {summary.class_counts[0], summary.class_counts[1]}},
                                        {"male", summary.male},
                                        {"female", summary.female},
                                        {"male_fraction", summary.male_fraction()},
                                        {"nominal_counts", nominal},
                                        {"histograms", hists},
                                        {"slope_by_age_decade", slope}});
  write_text(dir / "grouped_counts.csv", grouped);
  write_text(dir / "slope_by_age.csv", slope_csv);
  write_text(dir / "histograms.csv", hist_csv);

  const CorrelationTable table = correlation_with_target(raw);
  const CorrelationMatrix matrix = correlation_matrix(raw);
  json table_json = json::array();
  std::string table_csv = "attribute,correlation\n";
  for (const auto& e : table.entries) {
    table_json.push_back(json{{"attribute", e.attribute}, {"correlation", e.defined ? json(e.value) : json(nullptr)}});
    table_csv += e.attribute + "," + (e.defined ? num(e.value) : std::string("undefined")) + "\n";
  }
  json rows = json::array();
  std::string matrix_csv = "attribute";
  for (const auto& n : matrix.names) matrix_csv += "," + n;
  matrix_csv += "\n";
  for (std::size_t r = 0; r < matrix.names.size(); ++r) {
    json row = json::array();
    matrix_csv += matrix.names[r];
    for (std::size_t c = 0; c < matrix.names.size(); ++c) {
      const double v = matrix.values(r, c);
      row.push_back(std::isnan(v) ? json(nullptr) : json(v));
      matrix_csv += "," + (std::isnan(v) ? std::string("undefined") : num(v));
    }
    matrix_csv += "\n";
    rows.push_back(row);
  }
  write_json(dir / "correlation.json",
             json{{"with_target", table_json},
                  {"matrix", json{{"names", matrix.names}, {"values", rows}, {"constant", matrix.constant}}}});
  write_text(dir / "correlation_with_target.csv", table_csv);
  write_text(dir / "correlation_matrix.csv", matrix_csv);
}

BaselineResult cmd_baseline(const PipelineConfig& config, const PreparedData* data,
                            std::vector<TunedCandidate>* tuned_out) {
  PreparedData storage;
  const PreparedData& d = data != nullptr ? *data : (storage = prepare_data(config));
  const fs::path dir = config.output_dir / "baseline";
  ensure_dir(dir);

  std::vector<TunedCandidate> tuned = tune_candidates(config, d.split.train);
  BaselineResult result;
  for (const auto& t : tuned) {
    const TrainedModel m = fit(t.spec, d.split.train);
    result.rows.push_back({t, accuracy(d.split.test.target, m.predict(d.split.test.features))});
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const BaselineRow& a, const BaselineRow& b) { return a.test_accuracy > b.test_accuracy; });

  std::string table = "rank,algorithm,cv_accuracy,test_accuracy,cv_accuracy_pct,test_accuracy_pct\n";
  json rows = json::array();
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    const std::string name(algorithm_name(r.tuned.spec.algorithm));
    table += std::to_string(i + 1) + "," + name + "," + num(r.tuned.cv.mean_accuracy) + "," + num(r.test_accuracy) +
             "," + format_percent(r.tuned.cv.mean_accuracy) + "," + format_percent(r.test_accuracy) + "\n";
    json row{{"rank", i + 1},
             {"algorithm", name},
             {"spec", to_json(r.tuned.spec)},
             {"cv_accuracy", r.tuned.cv.mean_accuracy},
             {"fold_accuracy", r.tuned.cv.fold_accuracy},
             {"test_accuracy", r.test_accuracy}};
    if (r.tuned.grid) {
      json points = json::array();
      std::string grid_csv;
      for (const auto& [pname, v] : r.tuned.grid->points.front().values) grid_csv += pname + ",";
      grid_csv += "mean_cv_accuracy\n";
      for (const auto& p : r.tuned.grid->points) {
        json values = json::object();
        for (const auto& [pname, v] : p.values) {
          values[pname] = to_json(v);
          grid_csv += to_string(v) + ",";
        }
        grid_csv += num(p.mean_accuracy) + "\n";
        points.push_back(json{{"values", values}, {"mean_cv_accuracy", p.mean_accuracy},
                              {"fold_accuracy", p.fold_accuracy}});
      }
      row["grid"] = json{{"points", points}, {"best_index", r.tuned.grid->best_index}};
      write_text(dir / ("grid_" + name + ".csv"), grid_csv);
    }
    rows.push_back(row);
  }
  std::string comparison = "algorithm,test_accuracy_pct\n";
  for (const auto& t : tuned) {
    const BaselineRow* r = result.find(t.spec.algorithm);
    comparison += std::string(algorithm_name(t.spec.algorithm)) + "," + format_percent(r->test_accuracy) + "\n";
  }
  write_text(dir / "baseline.csv", table);
  write_text(dir / "comparison.csv", comparison);
  write_json(dir / "baseline.json",
             json{{"train_rows", d.split.train.size()}, {"test_rows", d.split.test.size()}, {"rows", rows}});
  if (tuned_out != nullptr) *tuned_out = std::move(tuned);
  return result;
}

TrainResult cmd_train(const PipelineConfig& config, const PreparedData* data,
                      const std::vector<TunedCandidate>* tuned) {
  PreparedData storage;
  const PreparedData& d = data != nullptr ? *data : (storage = prepare_data(config));
  std::vector<TunedCandidate> local;
  if (tuned == nullptr) {
    local = tune_candidates(config, d.split.train);
    tuned = &local;
  }
  const fs::path dir = config.output_dir / "models";
  ensure_dir(dir);
  // Tuning already cross-validated every candidate on the plan fit_stack
  // would draw, so its out-of-fold predictions are reused.
  const Dataset& train = d.split.train;
  const FoldPlan plan = k_fold_plan(train.size(), config.folds, config.seed, train.target);
  std::vector<CvResult> cv;
  for (const auto& t : *tuned) cv.push_back(t.cv);
  StackedModel model = fit_stack_from_cv(config.stacking(specs_of(*tuned)), train.features, train.target, plan, cv);
  const fs::path path = dir / "stack.model";
  save_model(model, path, SaveOptions{SchemaStamp::of(d.raw.schema), {}});
  write_json(dir / "selection.json", to_json(model.selection()));
  return TrainResult{std::move(model), path};
}

EvaluationResult cmd_evaluate(const PipelineConfig& config, const fs::path& model_path, const PreparedData* data) {
  const ModelFile file = load_model(model_path);
  PreparedData storage;
  const PreparedData& d = data != nullptr ? *data : (storage = prepare_data(config));
  file.require_schema(d.raw.schema);
  const Dataset& test = d.split.test;

  std::vector<std::pair<std::string, std::vector<double>>> scored;
  if (const auto* stack = std::get_if<StackedModel>(&file.model)) {
    scored.emplace_back("stacked", stack->predict_proba(test.features));
    for (const auto& b : stack->bases()) {
      scored.emplace_back(std::string(algorithm_name(b.spec().algorithm)), b.predict_proba(test.features));
    }
  } else {
    const auto& single = std::get<TrainedModel>(file.model);
    scored.emplace_back(std::string(algorithm_name(single.spec().algorithm)), single.predict_proba(test.features));
  }

  const fs::path dir = config.output_dir / "evaluation";
  ensure_dir(dir);
  EvaluationResult result;
  std::string table =
      "model,accuracy,precision,sensitivity,specificity,f1,balanced_auc,mcc,roc_auc,average_precision\n";
  json models = json::array();
  for (const auto& [name, proba] : scored) {
    std::vector<int> labels(proba.size());
    std::transform(proba.begin(), proba.end(), labels.begin(), label_for);
    ModelEvaluation e;
    e.name = name;
    e.confusion = confusion_matrix(test.target, labels);
    e.metrics = metric_report(e.confusion);
    e.roc = roc_curve(test.target, proba);
    e.pr = pr_curve(test.target, proba);
    const MetricReport& m = e.metrics;
    table += name + "," + format_percent(m.accuracy) + "," + format_percent(m.precision) + "," +
             format_percent(m.sensitivity) + "," + format_percent(m.specificity) + "," + format_percent(m.f1) + "," +
             format_percent(m.balanced_auc) + "," + format_percent(m.mcc) + "," + format_percent(e.roc.area) + "," +
             format_percent(e.pr.average_precision) + "\n";
    models.push_back(json{
        {"model", name},
        {"confusion", json{{"tp", e.confusion.tp}, {"tn", e.confusion.tn}, {"fp", e.confusion.fp},
                           {"fn", e.confusion.fn}}},
        {"accuracy", metric_json(m.accuracy)},
        {"precision", metric_json(m.precision)},
        {"sensitivity", metric_json(m.sensitivity)},
        {"specificity", metric_json(m.specificity)},
        {"f1", metric_json(m.f1)},
        {"balanced_auc", metric_json(m.balanced_auc)},
        {"mcc", metric_json(m.mcc)},
        {"roc_auc", e.roc.area},
        {"average_precision", e.pr.average_precision}});
    write_text(dir / ("roc_" + name + ".csv"), curve_csv("fpr", "tpr", e.roc.points));
    write_text(dir / ("roc_" + name + ".area"), "area," + num(e.roc.area) + "\n");
    write_text(dir / ("pr_" + name + ".csv"), curve_csv("recall", "precision", e.pr.points));
    write_text(dir / ("pr_" + name + ".area"), "average_precision," + num(e.pr.average_precision) + "\n");
    result.models.push_back(std::move(e));
  }
  write_text(dir / "metrics.csv", table);
  write_json(dir / "metrics.json", json{{"test_rows", test.size()}, {"models", models}});

  std::string lit = "number,authors,approach,dataset,accuracy\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (const auto& e : literature_table()) {
    lit += std::to_string(e.number) + "," + quote(e.authors) + "," + quote(e.approach) + "," + quote(e.dataset) +
           "," + e.accuracy + "\n";
  }
  write_text(dir / "literature.csv", lit);
  return result;
}

void cmd_predict(const fs::path& model_path, const fs::path& input, const fs::path& output) {
  const ModelFile file = load_model(model_path);
  const Dataset ds = parse_csv_file(input, ParseOptions{false});
  file.require_schema(ds.schema);
  const std::vector<double> proba = file.predict_proba(ds.features);
  const bool with_target = !ds.target.empty();
  std::string csv = with_target ? "row,probability,label,target\n" : "row,probability,label\n";
  std::vector<int> labels(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) {
    labels[i] = label_for(proba[i]);
    csv += std::to_string(i + 1) + "," + num(proba[i]) + "," + std::to_string(labels[i]);
    if (with_target) csv += "," + std::to_string(ds.target[i]);
    csv += "\n";
  }
  write_text(output, csv);
  if (with_target && !labels.empty()) {
    const ConfusionMatrix cm = confusion_matrix(ds.target, labels);
    const MetricReport m = metric_report(cm);
    fs::path report = output;
    report.replace_filename(output.stem().string() + "_metrics.json");
    write_json(report, json{{"confusion", json{{"tp", cm.tp}, {"tn", cm.tn}, {"fp", cm.fp}, {"fn", cm.fn}}},
                            {"accuracy", metric_json(m.accuracy)},
                            {"precision", metric_json(m.precision)},
                            {"sensitivity", metric_json(m.sensitivity)},
                            {"specificity", metric_json(m.specificity)},
                            {"f1", metric_json(m.f1)},
                            {"balanced_auc", metric_json(m.balanced_auc)},
                            {"mcc", metric_json(m.mcc)}});
  }
}

namespace {

RunSummary train_and_score(const PipelineConfig& config, const PreparedData& data) {
  std::vector<TunedCandidate> tuned;
  const BaselineResult baseline = cmd_baseline(config, &data, &tuned);
  const TrainResult trained = cmd_train(config, &data, &tuned);
  const EvaluationResult eval = cmd_evaluate(config, trained.model_path, &data);
  RunSummary s;
  s.seed = config.seed;
  s.stacked_test_accuracy = eval.models.front().metrics.accuracy.value_or(0.0);
  s.best_base_test_accuracy = baseline.rows.front().test_accuracy;
  s.best_base = std::string(algorithm_name(baseline.rows.front().tuned.spec.algorithm));
  return s;
}

}  // namespace

RunSummary cmd_run(const PipelineConfig& config) {
  cmd_analyze(config);
  const PreparedData data = prepare_data(config);
  return train_and_score(config, data);
}

std::vector<RunSummary> cmd_seed_sweep(const PipelineConfig& config, std::size_t count) {
  if (count == 0) fail(ErrorCategory::config, "--seeds must be at least 1");
  std::vector<RunSummary> runs;
  for (std::size_t i = 0; i < count; ++i) {
    PipelineConfig c = config;
    c.set_seed(config.seed + i);
    c.output_dir = config.output_dir / "seeds" / ("seed_" + std::to_string(c.seed));
    const PreparedData data = prepare_data(c);
    runs.push_back(train_and_score(c, data));
  }
  auto mean_std = [&](double RunSummary::*field) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r.*field;
    mean /= static_cast<double>(runs.size());
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.*field - mean) * (r.*field - mean);
    const double sd = runs.size() > 1 ? std::sqrt(ss / static_cast<double>(runs.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  std::string csv = "seed,stacked_test_accuracy,best_base,best_base_test_accuracy\n";
  for (const auto& r : runs) {
    csv += std::to_string(r.seed) + "," + num(r.stacked_test_accuracy) + "," + r.best_base + "," +
           num(r.best_base_test_accuracy) + "\n";
  }
  const auto [sm, ss] = mean_std(&RunSummary::stacked_test_accuracy);
  const auto [bm, bs] = mean_std(&RunSummary::best_base_test_accuracy);
  csv += "mean," + num(sm) + ",," + num(bm) + "\n";
  csv += "std," + num(ss) + ",," + num(bs) + "\n";
  write_text(config.output_dir / "seed_sweep.csv", csv);
  return runs;
}

}  // namespace heartstack
