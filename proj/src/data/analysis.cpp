#include <algorithm>
#include <cmath>
#include <limits>

#include "heartstack/data.hpp"
#include "heartstack/error.hpp"
#include "heartstack/kernels.hpp"

namespace heartstack {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return std::nullopt;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  std::vector<double> cx(n);
  std::vector<double> cy(n);
  for (std::size_t i = 0; i < n; ++i) {
    cx[i] = x[i] - mx;
    cy[i] = y[i] - my;
  }
  const double sxx = kernels::dot(cx, cx);
  const double syy = kernels::dot(cy, cy);
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = kernels::dot(cx, cy) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<double> target_column(const Dataset& ds) {
  if (ds.target.size() != ds.size()) fail(ErrorCategory::data, "correlation requires a target column");
  return {ds.target.begin(), ds.target.end()};
}

}  // namespace

const CorrelationEntry* CorrelationTable::find(const std::string& attribute) const {
  for (const auto& e : entries) {
    if (e.attribute == attribute) return &e;
  }
  return nullptr;
}

CorrelationTable correlation_with_target(const Dataset& ds) {
  const auto y = target_column(ds);
  CorrelationTable table;
  for (std::size_t f = 0; f < ds.schema.size(); ++f) {
    const auto x = ds.features.column(f);
    auto r = pearson(x, y);
    table.entries.push_back({ds.schema[f].name, r.value_or(std::nan("")), r.has_value()});
  }
  return table;
}

CorrelationMatrix correlation_matrix(const Dataset& ds) {
  std::vector<std::vector<double>> columns;
  CorrelationMatrix m;
  for (std::size_t f = 0; f < ds.schema.size(); ++f) {
    columns.push_back(ds.features.column(f));
    m.names.push_back(ds.schema[f].name);
  }
  columns.push_back(target_column(ds));
  m.names.emplace_back("target");

  const std::size_t k = columns.size();
  m.values = Matrix(k, k, std::nan(""));
  m.constant.assign(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    m.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      // Same argument order as correlation_with_target (feature, target).
      auto r = pearson(columns[i], columns[j]);
      const double v = r.value_or(std::nan(""));
      m.values(i, j) = v;
      m.values(j, i) = v;
    }
    const auto [lo, hi] = std::minmax_element(columns[i].begin(), columns[i].end());
    m.constant[i] = *lo == *hi;
  }
  return m;
}

SummaryReport summarize(const Dataset& ds, std::size_t histogram_bins) {
  if (histogram_bins == 0) fail(ErrorCategory::config, "histogram needs at least one bin");
  if (ds.target.size() != ds.size()) fail(ErrorCategory::data, "summary requires a target column");
  SummaryReport s;
  s.n = ds.size();
  s.class_counts = ds.class_counts();

  for (std::size_t r = 0; r < ds.size(); ++r) {
    (ds.features(r, col::sex) == 1.0 ? s.male : s.female) += 1;
  }

  for (std::size_t f = 0; f < ds.schema.size(); ++f) {
    const auto& spec = ds.schema[f];
    if (spec.is_nominal()) {
      auto& counts = s.nominal_counts[spec.name];
      for (int code : spec.allowed_codes) counts[code] = {0, 0};
      for (std::size_t r = 0; r < ds.size(); ++r) {
        ++counts[static_cast<int>(ds.features(r, f))][ds.target[r]];
      }
      continue;
    }
    Histogram h;
    h.attribute = spec.name;
    const auto column = ds.features.column(f);
    const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    h.min = *lo;
    h.max = *hi;
    h.bin_width = (h.max - h.min) / static_cast<double>(histogram_bins);
    h.bins.assign(histogram_bins, {0, 0});
    for (std::size_t r = 0; r < ds.size(); ++r) {
      std::size_t b = 0;
      if (h.bin_width > 0.0) {
        b = static_cast<std::size_t>((column[r] - h.min) / h.bin_width);
        b = std::min(b, histogram_bins - 1);
      }
      ++h.bins[b][ds.target[r]];
    }
    s.histograms.push_back(std::move(h));
  }

  for (std::size_t r = 0; r < ds.size(); ++r) {
    const int decade = static_cast<int>(std::floor(ds.features(r, col::age) / 10.0)) * 10;
    const int slope = static_cast<int>(ds.features(r, col::st_slope));
    ++s.slope_by_age_decade[{decade, slope}][ds.target[r]];
  }
  return s;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev, std::vector<bool> constant)
    : mean_(std::move(mean)), stddev_(std::move(stddev)), constant_(std::move(constant)) {
  if (stddev_.size() != mean_.size() || constant_.size() != mean_.size()) {
    fail(ErrorCategory::model, "standardizer vectors differ in length");
  }
  for (std::size_t c = 0; c < mean_.size(); ++c) {
    if (!std::isfinite(mean_[c]) || !std::isfinite(stddev_[c]) || stddev_[c] <= 0.0) {
      fail(ErrorCategory::model, "standardizer column " + std::to_string(c) + " has an invalid mean or scale");
    }
  }
}

Standardizer Standardizer::fit(const Matrix& train) {
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();
  if (n == 0) fail(ErrorCategory::data, "cannot fit a standardizer on zero rows");
  std::vector<double> mean(d, 0.0);
  std::vector<double> sd(d, 1.0);
  std::vector<bool> constant(d, false);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += train(r, c);
    const double m = sum / static_cast<double>(n);
    double ss = 0.0;
    bool all_equal = true;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = train(r, c) - m;
      ss += dv * dv;
      all_equal = all_equal && train(r, c) == train(0, c);
    }
    const double s = std::sqrt(ss / static_cast<double>(n));
    if (all_equal || s == 0.0) {
      constant[c] = true;
      mean[c] = 0.0;
      sd[c] = 1.0;
    } else {
      mean[c] = m;
      sd[c] = s;
    }
  }
  return Standardizer(std::move(mean), std::move(sd), std::move(constant));
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t c = 0; c < mean_.size(); ++c) out[c] = (in[c] - mean_[c]) / stddev_[c];
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean_.size()) fail(ErrorCategory::data, "standardizer width does not match input");
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) apply_row(x.row(r), out.row(r));
  return out;
}

Matrix Standardizer::invert(const Matrix& z) const {
  Matrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t c = 0; c < z.cols(); ++c) out(r, c) = z(r, c) * stddev_[c] + mean_[c];
  }
  return out;
}

Dataset Standardizer::apply(const Dataset& ds) const {
  Dataset out = ds;
  out.features = apply(ds.features);
  return out;
}

}  // namespace heartstack
