#include <algorithm>
#include <cmath>
#include <sstream>

#include "heartstack/data.hpp"
#include "heartstack/error.hpp"

namespace heartstack {

ValidationReport validate_schema(const Dataset& ds) {
  ValidationReport report;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t f = 0; f < ds.schema.size(); ++f) {
      const auto& spec = ds.schema[f];
      if (!spec.is_nominal()) continue;
      const double v = ds.features(r, f);
      const int code = static_cast<int>(v);
      if (v != std::floor(v) || !spec.allows(code)) {
        std::ostringstream msg;
        msg << "row " << r + 1 << ": " << spec.name << " = " << v << " is not an allowed code";
        report.violations.push_back({r, spec.name, v, msg.str()});
      } else if (std::find(spec.warning_codes.begin(), spec.warning_codes.end(), code) !=
                 spec.warning_codes.end()) {
        std::ostringstream msg;
        msg << "row " << r + 1 << ": " << spec.name << " = " << code << " is undocumented";
        report.warnings.push_back({r, spec.name, v, msg.str()});
      }
    }
    if (!ds.target.empty() && ds.target[r] != 0 && ds.target[r] != 1) {
      report.violations.push_back({r, "target", static_cast<double>(ds.target[r]), "target not in {0, 1}"});
    }
  }
  return report;
}

std::string CleaningStrategy::name() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::domain_validity: return "domain_validity";
    case Kind::iqr: {
      std::ostringstream s;
      s << "iqr(" << iqr_multiplier << ")";
      return s.str();
    }
  }
  return "none";
}

CleaningStrategy CleaningStrategy::parse(const std::string& text) {
  if (text == "none") return none();
  if (text == "domain_validity") return domain_validity();
  if (text.rfind("iqr(", 0) == 0 && text.back() == ')') {
    try {
      std::size_t used = 0;
      const std::string inner = text.substr(4, text.size() - 5);
      const double k = std::stod(inner, &used);
      if (used == inner.size() && k > 0.0) return iqr(k);
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCategory::config, "unknown cleaning strategy '" + text +
                                  "' (expected none, domain_validity or iqr(k) with k > 0)");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

CleanResult clean(const Dataset& ds, const CleaningStrategy& strategy) {
  if (!validate_schema(ds).valid()) {
    fail(ErrorCategory::data, "cannot clean a dataset with schema violations");
  }
  CleaningReport report;
  report.strategy = strategy.name();
  report.rows_input = ds.size();

  std::vector<bool> removed(ds.size(), false);
  auto remove = [&](std::size_t r, const std::string& reason) {
    if (removed[r]) return;
    removed[r] = true;
    ++report.removal_reasons[reason];
  };

  if (strategy.kind != CleaningStrategy::Kind::none) {
    for (std::size_t r = 0; r < ds.size(); ++r) {
      if (ds.features(r, col::resting_blood_pressure) == 0.0) {
        remove(r, "domain_validity:resting_blood_pressure_zero");
      }
    }
  }

  if (strategy.kind == CleaningStrategy::Kind::iqr) {
    // Fences are computed once, on the rows that survived domain validity.
    const std::vector<bool> domain_valid_removed = removed;
    for (std::size_t f = 0; f < ds.schema.size(); ++f) {
      if (ds.schema[f].is_nominal()) continue;
      std::vector<double> kept;
      for (std::size_t r = 0; r < ds.size(); ++r) {
        if (!domain_valid_removed[r]) kept.push_back(ds.features(r, f));
      }
      const double q1 = quantile(kept, 0.25);
      const double q3 = quantile(kept, 0.75);
      const double spread = q3 - q1;
      const double lo = q1 - strategy.iqr_multiplier * spread;
      const double hi = q3 + strategy.iqr_multiplier * spread;
      for (std::size_t r = 0; r < ds.size(); ++r) {
        const double v = ds.features(r, f);
        if (v < lo || v > hi) {
          // A row is charged to the first rule (in schema order) that rejects it.
          remove(r, "iqr:" + ds.schema[f].name);
        }
      }
    }
  }

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < ds.size(); ++r) {
    if (removed[r]) {
      report.removed_rows.push_back(r);
    } else {
      keep.push_back(r);
    }
  }
  if (keep.empty()) fail(ErrorCategory::data, "cleaning strategy " + report.strategy + " removes every row");
  report.rows_removed = report.removed_rows.size();

  CleanResult result{ds.subset(keep), std::move(report)};
  result.dataset.provenance.cleaned = strategy.kind != CleaningStrategy::Kind::none || ds.provenance.cleaned;
  return result;
}

}  // namespace heartstack
