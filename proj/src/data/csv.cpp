#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "heartstack/data.hpp"
#include "heartstack/error.hpp"

namespace heartstack {

namespace {

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t\r\n\"");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t\r\n\"");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string normalize(std::string_view header) {
  std::string out;
  for (char c : trim(header)) {
    if (c == ' ' || c == '-' || c == '.') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.push_back(trim(current));
  return fields;
}

std::optional<double> to_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::optional<std::string> canonical_column_name(const std::string& header) {
  static const std::unordered_map<std::string, std::string> aliases = {
      {"class", "target"},
      {"chest_pain", "chest_pain_type"},
      {"resting_bp_s", "resting_blood_pressure"},
      {"resting_bp", "resting_blood_pressure"},
      {"fasting_blood_sugar", "fasting_blood_sugar"},
      {"resting_ecg", "rest_ecg"},
      {"max_heart_rate", "max_heart_rate_achieved"},
      {"exercise_angina", "exercise_induced_angina"},
      {"oldpeak", "st_depression"},
  };
  const std::string key = normalize(header);
  if (key == "target") return key;
  for (const auto& spec : feature_schema()) {
    if (spec.name == key) return key;
  }
  if (auto it = aliases.find(key); it != aliases.end()) return it->second;
  return std::nullopt;
}

Dataset parse_csv(std::istream& in, const std::string& source_name, ParseOptions options) {
  const auto& schema = feature_schema();
  auto where = [&](std::size_t line) { return source_name + ":" + std::to_string(line) + ": "; };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line)) break;
  }
  if (line_no == 0 || is_blank(line)) fail(ErrorCategory::data, source_name + ": empty file");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  // header position -> canonical slot (0..10 features, 11 target)
  const auto header = split_fields(line);
  std::vector<int> slot_of(header.size(), -1);
  std::vector<int> column_of(kFeatureCount + 1, -1);
  // A missing required column is reported before an unknown one, since a
  // misspelt header produces both.
  std::optional<std::size_t> unknown;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = canonical_column_name(header[c]);
    if (!name) {
      if (!unknown) unknown = c;
      continue;
    }
    int slot = static_cast<int>(kFeatureCount);
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      if (schema[f].name == *name) slot = static_cast<int>(f);
    }
    if (column_of[slot] != -1) {
      fail(ErrorCategory::data, where(line_no) + "duplicate column '" + *name + "'");
    }
    column_of[slot] = static_cast<int>(c);
    slot_of[c] = slot;
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    if (column_of[f] == -1) {
      fail(ErrorCategory::data, where(line_no) + "missing column '" + schema[f].name + "'");
    }
  }
  const bool has_target = column_of[kFeatureCount] != -1;
  if (!has_target && options.require_target) {
    fail(ErrorCategory::data, where(line_no) + "missing column 'target'");
  }
  if (unknown) {
    fail(ErrorCategory::data, where(line_no) + "unknown column '" + header[*unknown] + "' (column " +
                                  std::to_string(*unknown + 1) + ")");
  }

  Dataset ds;
  ds.provenance.source = source_name;
  std::vector<double> row(kFeatureCount);
  std::size_t data_row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ++data_row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(ErrorCategory::data, where(line_no) + "row " + std::to_string(data_row) + " has " +
                                    std::to_string(fields.size()) + " fields, expected " +
                                    std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const int slot = slot_of[c];
      const std::string& column =
          slot == static_cast<int>(kFeatureCount) ? std::string("target") : schema[slot].name;
      auto cell_error = [&](const std::string& what) {
        fail(ErrorCategory::data, where(line_no) + "row " + std::to_string(data_row) + ", column '" +
                                      column + "': " + what);
      };
      if (fields[c].empty()) cell_error("missing value");
      auto value = to_number(fields[c]);
      if (!value) cell_error("non-numeric value '" + fields[c] + "'");
      const bool nominal = slot == static_cast<int>(kFeatureCount) || schema[slot].is_nominal();
      if (nominal && *value != std::floor(*value)) cell_error("non-integer code '" + fields[c] + "'");
      if (slot == static_cast<int>(kFeatureCount)) {
        if (*value != 0.0 && *value != 1.0) cell_error("target must be 0 or 1, got '" + fields[c] + "'");
        ds.target.push_back(static_cast<int>(*value));
      } else {
        row[slot] = *value;
      }
    }
    ds.features.append_row(row);
  }
  if (ds.size() == 0) fail(ErrorCategory::data, source_name + ": empty dataset");
  return ds;
}

Dataset parse_csv_file(const std::filesystem::path& path, ParseOptions options) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path.string() + "'");
  return parse_csv(in, path.string(), options);
}

}  // namespace heartstack
