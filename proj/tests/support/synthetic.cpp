#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace heartstack::testing {
namespace {

double normal(Rng& rng, double mean, double sd) {
  // Box-Muller on the portable uniform source.
  const double u1 = std::max(rng.uniform(), 1e-300);
  const double u2 = rng.uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int pick(Rng& rng, std::initializer_list<double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  int i = 0;
  for (double w : weights) {
    if (u < w) return i;
    u -= w;
    ++i;
  }
  return i - 1;
}

bool coin(Rng& rng, double p) { return rng.uniform() < p; }

double clampi(double v, double lo, double hi) { return std::round(std::clamp(v, lo, hi)); }

}  // namespace

Dataset synthetic_heart(std::size_t n, std::uint64_t seed, std::size_t outliers) {
  Rng rng(seed);
  Dataset ds;
  ds.provenance.source = "synthetic";
  ds.features = Matrix(0, kFeatureCount);
  for (std::size_t i = 0; i < n + outliers; ++i) {
    const int t = coin(rng, 0.53) ? 1 : 0;
    std::vector<double> r(kFeatureCount);
    r[col::age] = clampi(normal(rng, 50.0 + 5.0 * t, 9.0), 28, 77);
    r[col::sex] = coin(rng, 0.62 + 0.25 * t) ? 1 : 0;
    r[col::chest_pain_type] = t ? 1 + pick(rng, {0.05, 0.07, 0.15, 0.73}) : 1 + pick(rng, {0.07, 0.35, 0.35, 0.23});
    r[col::resting_blood_pressure] = clampi(normal(rng, 130.0 + 4.0 * t, 17.0), 92, 200);
    r[col::cholesterol] = t && coin(rng, 0.15) ? 0.0 : clampi(normal(rng, 235.0, 50.0), 110, 420);
    r[col::fasting_blood_sugar] = coin(rng, 0.12 + 0.15 * t) ? 1 : 0;
    r[col::rest_ecg] = pick(rng, {0.6, 0.2, 0.2});
    r[col::max_heart_rate_achieved] = clampi(normal(rng, 150.0 - 22.0 * t, 22.0), 70, 202);
    r[col::exercise_induced_angina] = coin(rng, 0.13 + 0.5 * t) ? 1 : 0;
    r[col::st_depression] = std::round(std::clamp(std::fabs(normal(rng, 0.3 + 1.1 * t, 0.9)), 0.0, 5.6) * 10) / 10;
    r[col::st_slope] = t ? 1 + pick(rng, {0.15, 0.75, 0.10}) : 1 + pick(rng, {0.75, 0.22, 0.03});
    if (i >= n) {
      r[col::cholesterol] = 560 + static_cast<double>(rng.below(40));
      r[col::resting_blood_pressure] = i % 2 == 0 ? 0.0 : 200.0;
      r[col::st_depression] = 6.2;
    }
    ds.features.append_row(r);
    ds.target.push_back(t);
  }
  return ds;
}

std::string to_csv(const Dataset& ds, bool with_target) {
  std::ostringstream out;
  for (std::size_t c = 0; c < ds.schema.size(); ++c) out << (c ? "," : "") << ds.schema[c].name;
  if (with_target) out << ",target";
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t c = 0; c < ds.features.cols(); ++c) out << (c ? "," : "") << ds.features(i, c);
    if (with_target) out << "," << ds.target[i];
    out << "\n";
  }
  return out.str();
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, bool with_target) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << to_csv(ds, with_target);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo, double hi) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  }
  return m;
}

std::vector<int> random_labels(std::size_t rows, Rng& rng) {
  std::vector<int> y(rows);
  for (auto& v : y) v = static_cast<int>(rng.below(2));
  if (rows >= 2) {
    y[0] = 0;
    y[1] = 1;
    rng.shuffle(std::span<int>(y));
  }
  return y;
}

Matrix distinct_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  if (static_cast<double>(rows) > std::pow(5.0, static_cast<double>(cols))) {
    throw std::invalid_argument("distinct_rows: not enough distinct rows");
  }
  std::set<std::vector<double>> seen;
  Matrix m(0, cols);
  while (m.rows() < rows) {
    std::vector<double> r(cols);
    for (auto& v : r) v = static_cast<double>(rng.below(5));
    if (seen.insert(r).second) m.append_row(r);
  }
  return m;
}

Dataset tiny_dataset(std::size_t rows, std::uint64_t seed) {
  Dataset ds = synthetic_heart(rows, seed);
  if (rows >= 2) {
    ds.target[0] = 0;
    ds.target[1] = 1;
  }
  return ds;
}

}  // namespace heartstack::testing
