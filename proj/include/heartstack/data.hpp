#pragma once

// Heart-disease table: schema, CSV ingest, validation, outlier cleaning,
// stratified splitting, correlation analysis, grouped summaries and feature
// standardization.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heartstack/matrix.hpp"

namespace heartstack {

enum class AttributeKind { numeric, nominal };

struct AttributeSpec {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;
  std::vector<int> allowed_codes;  // nominal only
  std::vector<int> warning_codes;  // accepted but reported (subset of allowed)
  std::string units;

  bool is_nominal() const { return kind == AttributeKind::nominal; }
  bool allows(int code) const;
};

inline constexpr std::size_t kFeatureCount = 11;

/// Column positions in the canonical feature order.
namespace col {
inline constexpr std::size_t age = 0;
inline constexpr std::size_t sex = 1;
inline constexpr std::size_t chest_pain_type = 2;
inline constexpr std::size_t resting_blood_pressure = 3;
inline constexpr std::size_t cholesterol = 4;
inline constexpr std::size_t fasting_blood_sugar = 5;
inline constexpr std::size_t rest_ecg = 6;
inline constexpr std::size_t max_heart_rate_achieved = 7;
inline constexpr std::size_t exercise_induced_angina = 8;
inline constexpr std::size_t st_depression = 9;
inline constexpr std::size_t st_slope = 10;
}  // namespace col

/// The 11 feature specs in canonical order.
const std::vector<AttributeSpec>& feature_schema();
const AttributeSpec& target_spec();

/// Stable 64-bit hash of the column names and kinds, hex encoded.
std::string schema_fingerprint(const std::vector<AttributeSpec>& features);

struct Provenance {
  std::string source;
  bool cleaned = false;
};

/// Instances with the 11 canonical features and an optional 0/1 target.
/// Target is required for every analysis and training path; it may be absent
/// only for tables parsed for scoring.
struct Dataset {
  std::vector<AttributeSpec> schema = feature_schema();
  Matrix features{0, kFeatureCount};
  std::vector<int> target;
  Provenance provenance;

  std::size_t size() const { return features.rows(); }
  bool has_target() const { return !target.empty() || size() == 0; }

  /// Rows at `indices`, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  std::array<std::size_t, 2> class_counts() const;
};

struct ParseOptions {
  bool require_target = true;
};

/// Reads a comma-separated table with a header row. Columns are matched to
/// the canonical schema by (normalized) name; `class` is accepted for the
/// target, and the original data-port header spellings are accepted as
/// aliases. Errors carry row and column coordinates.
Dataset parse_csv(std::istream& in, const std::string& source_name = "<stream>",
                  ParseOptions options = {});
Dataset parse_csv_file(const std::filesystem::path& path, ParseOptions options = {});

/// Maps a header cell to a canonical column name ("target" for the label),
/// or nullopt when unknown.
std::optional<std::string> canonical_column_name(const std::string& header);

// ---------------------------------------------------------------------------

struct SchemaIssue {
  std::size_t row = 0;  // 0-based data row
  std::string column;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<SchemaIssue> violations;
  std::vector<SchemaIssue> warnings;
  bool valid() const { return violations.empty(); }
};

ValidationReport validate_schema(const Dataset& ds);

// ---------------------------------------------------------------------------

struct CleaningStrategy {
  enum class Kind { none, domain_validity, iqr };
  Kind kind = Kind::none;
  double iqr_multiplier = 1.5;  // iqr only

  static CleaningStrategy none() { return {Kind::none, 0.0}; }
  static CleaningStrategy domain_validity() { return {Kind::domain_validity, 0.0}; }
  /// Domain validity followed by the Tukey fence on every numeric feature.
  static CleaningStrategy iqr(double k) { return {Kind::iqr, k}; }

  std::string name() const;
  static CleaningStrategy parse(const std::string& text);
};

struct CleaningReport {
  std::string strategy;
  std::size_t rows_input = 0;
  std::size_t rows_removed = 0;
  std::map<std::string, std::size_t> removal_reasons;
  std::vector<std::size_t> removed_rows;  // 0-based input positions
};

struct CleanResult {
  Dataset dataset;
  CleaningReport report;
};

CleanResult clean(const Dataset& ds, const CleaningStrategy& strategy);

/// Linear-interpolation quantile (the common "type 7" definition).
double quantile(std::vector<double> values, double q);

// ---------------------------------------------------------------------------

struct SplitPair {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t seed = 0;
  double fraction = 0.0;
};

/// Per-class seeded shuffle; |train| = round(fraction * n), and each class
/// contributes floor(fraction * n_c) rows plus at most one of the leftover
/// rows (largest remainders first).
SplitPair stratified_split(const Dataset& ds, double fraction, std::uint64_t seed);

// ---------------------------------------------------------------------------

struct CorrelationEntry {
  std::string attribute;
  double value = 0.0;
  bool defined = true;  // false for zero-variance columns
};

struct CorrelationTable {
  std::vector<CorrelationEntry> entries;  // canonical feature order
  const CorrelationEntry* find(const std::string& attribute) const;
};

/// Pearson coefficient between two columns; nullopt when either is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

CorrelationTable correlation_with_target(const Dataset& ds);

struct CorrelationMatrix {
  std::vector<std::string> names;  // 11 features then "target"
  Matrix values;                   // NaN where undefined
  std::vector<bool> constant;      // per column
};

CorrelationMatrix correlation_matrix(const Dataset& ds);

// ---------------------------------------------------------------------------

struct Histogram {
  std::string attribute;
  double min = 0.0;
  double max = 0.0;
  double bin_width = 0.0;
  std::vector<std::array<std::size_t, 2>> bins;  // [count target 0, count target 1]
};

struct SummaryReport {
  std::size_t n = 0;
  std::array<std::size_t, 2> class_counts{};
  std::size_t male = 0;
  std::size_t female = 0;
  /// nominal attribute -> code -> per-target counts
  std::map<std::string, std::map<int, std::array<std::size_t, 2>>> nominal_counts;
  std::vector<Histogram> histograms;
  /// (age decade lower bound, st_slope code) -> per-target counts
  std::map<std::pair<int, int>, std::array<std::size_t, 2>> slope_by_age_decade;

  double male_fraction() const { return n == 0 ? 0.0 : static_cast<double>(male) / n; }
};

SummaryReport summarize(const Dataset& ds, std::size_t histogram_bins = 20);

// ---------------------------------------------------------------------------

/// Per-column z-scoring with population statistics. Zero-variance columns
/// keep std = 1, are flagged, and pass through unchanged.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> stddev, std::vector<bool> constant);

  static Standardizer fit(const Matrix& train);

  Matrix apply(const Matrix& x) const;
  void apply_row(std::span<const double> in, std::span<double> out) const;
  Matrix invert(const Matrix& z) const;
  Dataset apply(const Dataset& ds) const;

  const std::vector<double>& mean() const { return mean_; }
  const std::vector<double>& stddev() const { return stddev_; }
  const std::vector<bool>& constant() const { return constant_; }
  std::size_t width() const { return mean_.size(); }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> stddev_;
  std::vector<bool> constant_;
};

}  // namespace heartstack
