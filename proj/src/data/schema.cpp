#include <algorithm>
#include <cstdio>

#include "heartstack/data.hpp"

namespace heartstack {

bool AttributeSpec::allows(int code) const {
  return std::find(allowed_codes.begin(), allowed_codes.end(), code) != allowed_codes.end();
}

const std::vector<AttributeSpec>& feature_schema() {
  using K = AttributeKind;
  static const std::vector<AttributeSpec> schema = {
      {"age", K::numeric, {}, {}, "years"},
      {"sex", K::nominal, {0, 1}, {}, "1 = male, 0 = female"},
      {"chest_pain_type", K::nominal, {1, 2, 3, 4}, {}, "1 typical, 2 atypical, 3 non-anginal, 4 asymptomatic"},
      {"resting_blood_pressure", K::numeric, {}, {}, "mm Hg"},
      {"cholesterol", K::numeric, {}, {}, "mg/dl"},
      {"fasting_blood_sugar", K::nominal, {0, 1}, {}, "1 = > 120 mg/dl"},
      {"rest_ecg", K::nominal, {0, 1, 2}, {}, "0 normal, 1 ST-T abnormality, 2 LV hypertrophy"},
      {"max_heart_rate_achieved", K::numeric, {}, {}, "beats per minute"},
      {"exercise_induced_angina", K::nominal, {0, 1}, {}, "1 = yes"},
      {"st_depression", K::numeric, {}, {}, "mm (oldpeak)"},
      // Code 0 occurs in the combined table but is outside the documented 1-3.
      {"st_slope", K::nominal, {0, 1, 2, 3}, {0}, "1 up, 2 flat, 3 down"},
  };
  return schema;
}

const AttributeSpec& target_spec() {
  static const AttributeSpec spec{"target", AttributeKind::nominal, {0, 1}, {}, "1 = heart disease"};
  return spec;
}

std::string schema_fingerprint(const std::vector<AttributeSpec>& features) {
  // FNV-1a over "name:kind;" records.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& a : features) {
    feed(a.name);
    feed(a.is_nominal() ? ":nominal;" : ":numeric;");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.schema = schema;
  out.provenance = provenance;
  out.features = features.select_rows(indices);
  if (!target.empty()) {
    out.target.reserve(indices.size());
    for (auto i : indices) out.target.push_back(target[i]);
  }
  return out;
}

std::array<std::size_t, 2> Dataset::class_counts() const {
  std::array<std::size_t, 2> counts{};
  for (int t : target) ++counts[t == 1 ? 1 : 0];
  return counts;
}

}  // namespace heartstack
