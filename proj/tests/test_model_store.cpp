#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "heartstack/ensemble.hpp"
#include "heartstack/error.hpp"
#include "heartstack/model_store.hpp"
#include "synthetic.hpp"

namespace hs = heartstack;
using hs::Algorithm;
using json = nlohmann::json;

namespace {

hs::LearnerSpec quick(Algorithm a) {
  switch (a) {
    case Algorithm::random_forest:
    case Algorithm::extra_trees: return {a, {{"n_estimators", 12.0}}, 5};
    case Algorithm::gbm:
    case Algorithm::xgb_style: return {a, {{"n_estimators", 15.0}}, 5};
    case Algorithm::mlp: return {a, {{"epochs", 50.0}}, 5};
    default: return {a, {}, 5};
  }
}

template <class M>
std::string save_string(const M& model, const hs::SaveOptions& options = {}) {
  std::ostringstream out;
  hs::save_model(model, out, options);
  return out.str();
}

hs::ModelFile load_string(const std::string& text) {
  std::istringstream in(text);
  return hs::load_model(in);
}

hs::ErrorCategory category_of_load(const std::string& text) {
  try {
    load_string(text);
  } catch (const hs::Error& e) {
    return e.category();
  }
  FAIL("load unexpectedly succeeded");
  return hs::ErrorCategory::io;
}

std::string resave(const hs::ModelFile& file) {
  const hs::SaveOptions options{file.schema, file.created};
  if (file.stacked()) return save_string(std::get<hs::StackedModel>(file.model), options);
  return save_string(std::get<hs::TrainedModel>(file.model), options);
}

}  // namespace

TEST_CASE("every algorithm round-trips with identical predictions") {
  const auto train = hs::testing::synthetic_heart(200, 1);
  hs::Rng rng(2);
  auto probe = hs::testing::synthetic_heart(60, 3, 5).features;
  const auto wild = hs::testing::random_matrix(40, 11, rng, -300, 300);
  for (std::size_t r = 0; r < wild.rows(); ++r) probe.append_row(wild.row(r));
  REQUIRE(probe.rows() == 105);

  auto algorithms = hs::baseline_algorithms();
  algorithms.push_back(Algorithm::naive_bayes);
  algorithms.push_back(Algorithm::constant);
  for (auto a : algorithms) {
    CAPTURE(hs::algorithm_name(a));
    const auto model = hs::fit(quick(a), train);
    const auto text = save_string(model);
    const auto file = load_string(text);
    CHECK_FALSE(file.stacked());
    CHECK(file.version == hs::kModelFormatVersion);
    const auto& loaded = std::get<hs::TrainedModel>(file.model);
    CHECK(loaded.spec() == model.spec());
    CHECK(loaded.predict_proba(probe) == model.predict_proba(probe));
    CHECK(loaded.predict(probe) == model.predict(probe));
    CHECK(file.predict_proba(probe) == model.predict_proba(probe));
    CHECK(resave(file) == text);

    const auto doc = json::parse(text);
    CHECK(doc.size() == 4);
    for (const char* key : {"version", "kind", "schema", "payload"}) CHECK(doc.contains(key));
    CHECK(doc["kind"] == "single");
  }
}

TEST_CASE("a 500-tree forest keeps every tree") {
  const auto train = hs::testing::synthetic_heart(80, 4);
  const auto model = hs::fit(hs::LearnerSpec{Algorithm::random_forest, {{"n_estimators", 500.0}, {"max_depth", 3.0}}, 1},
                             train);
  const auto doc = json::parse(save_string(model));
  CHECK(doc["payload"]["classifier"]["trees"].size() == 500);
}

TEST_CASE("stacked models round-trip with one section per base") {
  const auto train = hs::testing::synthetic_heart(150, 5);
  hs::StackingConfig config;
  config.candidate_specs = {quick(Algorithm::gbm), quick(Algorithm::random_forest), quick(Algorithm::cart),
                            quick(Algorithm::knn), quick(Algorithm::naive_bayes)};
  config.top_n = 3;
  config.oof_folds = 5;
  const auto model = hs::fit_stack(config, train);
  const auto text = save_string(model);
  const auto doc = json::parse(text);
  CHECK(doc["kind"] == "stacked");
  CHECK(doc["payload"]["bases"].size() == 3);
  CHECK(doc["payload"]["meta"].is_object());

  const auto file = load_string(text);
  REQUIRE(file.stacked());
  const auto& loaded = std::get<hs::StackedModel>(file.model);
  const auto probe = hs::testing::synthetic_heart(100, 6).features;
  CHECK(loaded.predict_proba(probe) == model.predict_proba(probe));
  CHECK(loaded.selection().selected == model.selection().selected);
  CHECK(loaded.fold_plan().assignments == model.fold_plan().assignments);
  CHECK(resave(file) == text);
}

TEST_CASE("creation timestamp") {
  const auto train = hs::testing::synthetic_heart(50, 7);
  const auto model = hs::fit(quick(Algorithm::cart), train);
  hs::SaveOptions options;
  options.created = "2024-05-01T12:00:00Z";
  CHECK(load_string(save_string(model, options)).created == "2024-05-01T12:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
  CHECK(load_string(save_string(model)).created == "1970-01-01T00:00:00Z");
  setenv("SOURCE_DATE_EPOCH", "86400", 1);
  CHECK(load_string(save_string(model)).created == "1970-01-02T00:00:00Z");
  unsetenv("SOURCE_DATE_EPOCH");
}

TEST_CASE("corrupted and foreign documents are rejected") {
  const auto train = hs::testing::synthetic_heart(50, 8);
  const auto text = save_string(hs::fit(quick(Algorithm::gbm), train));

  CHECK(category_of_load(text.substr(0, text.size() / 2)) == hs::ErrorCategory::model);
  CHECK(category_of_load("") == hs::ErrorCategory::model);
  CHECK(category_of_load("[1, 2, 3]") == hs::ErrorCategory::model);

  auto doc = json::parse(text);
  doc["version"] = hs::kModelFormatVersion + 1;
  try {
    load_string(doc.dump());
    FAIL("future version accepted");
  } catch (const hs::Error& e) {
    CHECK(e.category() == hs::ErrorCategory::model);
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  doc = json::parse(text);
  doc["kind"] = "ensemble";
  CHECK(category_of_load(doc.dump()) == hs::ErrorCategory::model);

  doc = json::parse(text);
  doc["payload"]["classifier"].erase("trees");
  CHECK(category_of_load(doc.dump()) == hs::ErrorCategory::model);

  doc = json::parse(text);
  doc["payload"]["spec"]["algorithm"] = "cart";
  CHECK(category_of_load(doc.dump()) == hs::ErrorCategory::model);

  doc = json::parse(text);
  doc["schema"]["columns"].erase(0);
  CHECK(category_of_load(doc.dump()) == hs::ErrorCategory::model);
}

TEST_CASE("schema fingerprint is checked at scoring time") {
  const auto train = hs::testing::synthetic_heart(50, 9);
  const auto file = load_string(save_string(hs::fit(quick(Algorithm::cart), train)));
  CHECK(file.schema == hs::SchemaStamp::of(hs::feature_schema()));
  CHECK_NOTHROW(file.require_schema(hs::feature_schema()));
  auto other = hs::feature_schema();
  other[4].name = "serum_cholesterol";
  try {
    file.require_schema(other);
    FAIL("schema mismatch accepted");
  } catch (const hs::Error& e) {
    CHECK(e.category() == hs::ErrorCategory::data);
  }
}

TEST_CASE("file paths") {
  const auto train = hs::testing::synthetic_heart(50, 10);
  const auto model = hs::fit(quick(Algorithm::knn), train);
  const auto dir = std::filesystem::temp_directory_path() / "heartstack_model_store_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "knn.model";
  hs::save_model(model, path);
  CHECK(std::get<hs::TrainedModel>(hs::load_model(path).model).predict(train.features) == model.predict(train.features));
  try {
    hs::load_model(dir / "missing.model");
    FAIL("missing file accepted");
  } catch (const hs::Error& e) {
    CHECK(e.category() == hs::ErrorCategory::io);
  }
  CHECK_THROWS_AS(hs::save_model(model, dir / "no_such_dir" / "x.model"), hs::Error);
  std::filesystem::remove_all(dir);
}
