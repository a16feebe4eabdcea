#include "heartstack/model_store.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>

#include "heartstack/error.hpp"

namespace heartstack {
namespace {

std::string kind_name(AttributeKind k) { return k == AttributeKind::numeric ? "numeric" : "nominal"; }

std::string default_timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != nullptr && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json schema_json(const SchemaStamp& s) {
  json columns = json::array();
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    columns.push_back(json{{"name", s.columns[i]}, {"kind", s.kinds[i]}});
  }
  return json{{"fingerprint", s.fingerprint}, {"columns", columns}};
}

SchemaStamp schema_from_json(const json& j) {
  SchemaStamp s;
  s.fingerprint = j.at("fingerprint").get<std::string>();
  for (const auto& c : j.at("columns")) {
    s.columns.push_back(c.at("name").get<std::string>());
    s.kinds.push_back(c.at("kind").get<std::string>());
  }
  return s;
}

json standardizer_json(const Standardizer& s) {
  return json{{"mean", s.mean()}, {"stddev", s.stddev()}, {"constant", s.constant()}};
}

json single_payload(const TrainedModel& m) {
  json p{{"spec", to_json(m.spec())}, {"n_features", m.n_features()}, {"classifier", m.classifier().to_json()}};
  p["standardizer"] = m.standardizer() ? standardizer_json(*m.standardizer()) : json(nullptr);
  return p;
}

TrainedModel single_from_payload(const json& p) {
  LearnerSpec spec = spec_from_json(p.at("spec"));
  std::optional<Standardizer> standardizer;
  if (!p.at("standardizer").is_null()) {
    const json& s = p.at("standardizer");
    standardizer = Standardizer(s.at("mean").get<std::vector<double>>(), s.at("stddev").get<std::vector<double>>(),
                                s.at("constant").get<std::vector<bool>>());
  }
  if (spec.needs_standardization() != standardizer.has_value()) {
    fail(ErrorCategory::model, "standardizer presence does not match the algorithm");
  }
  auto classifier = classifier_from_json(spec.algorithm, p.at("classifier"));
  return TrainedModel(std::move(spec), std::move(standardizer), std::move(classifier),
                      p.at("n_features").get<std::size_t>());
}

json plan_json(const FoldPlan& plan) {
  return json{{"k", plan.k}, {"seed", plan.seed}, {"stratified", plan.stratified}, {"assignments", plan.assignments}};
}

FoldPlan plan_from_json(const json& j) {
  FoldPlan plan;
  plan.k = j.at("k").get<std::size_t>();
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.stratified = j.at("stratified").get<bool>();
  plan.assignments = j.at("assignments").get<std::vector<std::size_t>>();
  for (auto a : plan.assignments) {
    if (a >= plan.k) fail(ErrorCategory::model, "fold assignment out of range");
  }
  return plan;
}

json document(const char* kind, const SaveOptions& options, json payload) {
  const SchemaStamp& s = options.schema;
  if (s.columns.size() != s.kinds.size()) fail(ErrorCategory::model, "schema stamp is inconsistent");
  payload["created"] = options.created.empty() ? default_timestamp() : options.created;
  return json{{"version", kModelFormatVersion}, {"kind", kind}, {"schema", schema_json(s)}, {"payload", payload}};
}

void write(const json& doc, std::ostream& sink) {
  sink << doc.dump(1) << '\n';
  sink.flush();
  if (!sink) fail(ErrorCategory::io, "failed to write model");
}

template <class Model>
void save_to_path(const Model& model, const std::filesystem::path& path, const SaveOptions& options) {
  const json doc = model_document(model, options);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  write(doc, out);
}

}  // namespace

SchemaStamp SchemaStamp::of(const std::vector<AttributeSpec>& features) {
  SchemaStamp s;
  s.fingerprint = schema_fingerprint(features);
  for (const auto& f : features) {
    s.columns.push_back(f.name);
    s.kinds.push_back(kind_name(f.kind));
  }
  return s;
}

void ModelFile::require_schema(const std::vector<AttributeSpec>& features) const {
  const std::string fp = schema_fingerprint(features);
  if (fp != schema.fingerprint) {
    fail(ErrorCategory::data, "schema fingerprint mismatch: model " + schema.fingerprint + ", data " + fp);
  }
}

double ModelFile::predict_proba(std::span<const double> row) const {
  return std::visit([&](const auto& m) { return m.predict_proba(row); }, model);
}

std::vector<double> ModelFile::predict_proba(const Matrix& rows) const {
  return std::visit([&](const auto& m) { return m.predict_proba(rows); }, model);
}

std::vector<int> ModelFile::predict(const Matrix& rows) const {
  return std::visit([&](const auto& m) { return m.predict(rows); }, model);
}

json model_document(const TrainedModel& model, const SaveOptions& options) {
  return document("single", options, single_payload(model));
}

json model_document(const StackedModel& model, const SaveOptions& options) {
  json bases = json::array();
  for (const auto& b : model.bases()) bases.push_back(single_payload(b));
  json payload{{"bases", bases},
               {"meta", single_payload(model.meta())},
               {"selection", to_json(model.selection())},
               {"fold_plan", plan_json(model.fold_plan())}};
  return document("stacked", options, std::move(payload));
}

ModelFile model_from_document(const json& doc) {
  try {
    if (!doc.is_object()) fail(ErrorCategory::model, "model document is not an object");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      fail(ErrorCategory::model, "unsupported model format version " + std::to_string(version) +
                                     " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }
    SchemaStamp schema = schema_from_json(doc.at("schema"));
    if (schema.columns.size() != kFeatureCount) fail(ErrorCategory::model, "model schema has the wrong column count");
    const std::string kind = doc.at("kind").get<std::string>();
    const json& payload = doc.at("payload");
    std::string created = payload.at("created").get<std::string>();
    if (kind == "single") {
      TrainedModel m = single_from_payload(payload);
      if (m.n_features() != schema.columns.size()) fail(ErrorCategory::model, "model width differs from its schema");
      return ModelFile{version, std::move(created), std::move(schema), std::move(m)};
    }
    if (kind == "stacked") {
      std::vector<TrainedModel> bases;
      for (const auto& b : payload.at("bases")) bases.push_back(single_from_payload(b));
      StackedModel m(std::move(bases), single_from_payload(payload.at("meta")),
                     selection_from_json(payload.at("selection")), plan_from_json(payload.at("fold_plan")));
      if (m.bases().front().n_features() != schema.columns.size()) {
        fail(ErrorCategory::model, "model width differs from its schema");
      }
      if (m.selection().selected.size() != m.bases().size()) {
        fail(ErrorCategory::model, "selection report disagrees with the stored bases");
      }
      return ModelFile{version, std::move(created), std::move(schema), std::move(m)};
    }
    fail(ErrorCategory::model, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    fail(ErrorCategory::model, std::string("corrupted model document: ") + e.what());
  } catch (const Error& e) {
    // Anything invalid inside a stored document (specs, parameters) is a model error.
    if (e.category() == ErrorCategory::model) throw;
    fail(ErrorCategory::model, std::string("corrupted model document: ") + e.what());
  }
}

void save_model(const TrainedModel& model, std::ostream& sink, const SaveOptions& options) {
  write(model_document(model, options), sink);
}

void save_model(const StackedModel& model, std::ostream& sink, const SaveOptions& options) {
  write(model_document(model, options), sink);
}

void save_model(const TrainedModel& model, const std::filesystem::path& path, const SaveOptions& options) {
  save_to_path(model, path, options);
}

void save_model(const StackedModel& model, const std::filesystem::path& path, const SaveOptions& options) {
  save_to_path(model, path, options);
}

ModelFile load_model(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    fail(ErrorCategory::model, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_document(doc);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::io, "cannot open model file " + path.string());
  return load_model(in);
}

}  // namespace heartstack
