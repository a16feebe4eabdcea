#pragma once

// Versioned .model documents for single and stacked models.
//
// A document is a JSON object with top-level keys version, kind, schema and
// payload. Numbers are written in shortest round-trip form, so loading and
// re-saving a model reproduces the same bytes.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "heartstack/data.hpp"
#include "heartstack/ensemble.hpp"
#include "heartstack/learners.hpp"

namespace heartstack {

inline constexpr int kModelFormatVersion = 1;

struct SchemaStamp {
  std::string fingerprint;
  std::vector<std::string> columns;
  std::vector<std::string> kinds;

  static SchemaStamp of(const std::vector<AttributeSpec>& features);
  friend bool operator==(const SchemaStamp&, const SchemaStamp&) = default;
};

struct SaveOptions {
  SchemaStamp schema = SchemaStamp::of(feature_schema());
  /// ISO-8601 UTC. Empty means the reproducible default: SOURCE_DATE_EPOCH
  /// when set, otherwise the Unix epoch.
  std::string created;
};

using AnyModel = std::variant<TrainedModel, StackedModel>;

struct ModelFile {
  int version = kModelFormatVersion;
  std::string created;
  SchemaStamp schema;
  AnyModel model;

  bool stacked() const { return std::holds_alternative<StackedModel>(model); }
  /// Throws Error(data) when the dataset columns differ from the model's.
  void require_schema(const std::vector<AttributeSpec>& features) const;
  double predict_proba(std::span<const double> row) const;
  std::vector<double> predict_proba(const Matrix& rows) const;
  std::vector<int> predict(const Matrix& rows) const;
};

json model_document(const TrainedModel& model, const SaveOptions& options = {});
json model_document(const StackedModel& model, const SaveOptions& options = {});
ModelFile model_from_document(const json& document);

void save_model(const TrainedModel& model, std::ostream& sink, const SaveOptions& options = {});
void save_model(const StackedModel& model, std::ostream& sink, const SaveOptions& options = {});
void save_model(const TrainedModel& model, const std::filesystem::path& path, const SaveOptions& options = {});
void save_model(const StackedModel& model, const std::filesystem::path& path, const SaveOptions& options = {});

ModelFile load_model(std::istream& source);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace heartstack
