#include <algorithm>
#include <cmath>
#include <numeric>

#include "heartstack/data.hpp"
#include "heartstack/error.hpp"
#include "heartstack/rng.hpp"

namespace heartstack {

SplitPair stratified_split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    fail(ErrorCategory::config, "split fraction must lie strictly between 0 and 1");
  }
  if (ds.target.size() != ds.size()) fail(ErrorCategory::data, "split requires a target column");

  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.target[i]].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      fail(ErrorCategory::data, "class " + std::to_string(c) + " has fewer than 2 rows; cannot split");
    }
  }

  const auto n = static_cast<double>(ds.size());
  const auto total_train = static_cast<std::size_t>(std::llround(fraction * n));
  std::array<std::size_t, 2> take{};
  std::array<double, 2> remainder{};
  for (int c = 0; c < 2; ++c) {
    const double exact = fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
  }
  std::size_t leftover = total_train - (take[0] + take[1]);
  // Largest remainder first, class 0 on ties.
  const int first = remainder[1] > remainder[0] ? 1 : 0;
  for (int c : {first, 1 - first}) {
    if (leftover > 0 && take[c] < by_class[c].size()) {
      ++take[c];
      --leftover;
    }
  }

  SplitPair out;
  out.seed = seed;
  out.fraction = fraction;
  for (int c = 0; c < 2; ++c) {
    auto rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    rng.shuffle(std::span(by_class[c]));
    out.train_indices.insert(out.train_indices.end(), by_class[c].begin(), by_class[c].begin() + take[c]);
    out.test_indices.insert(out.test_indices.end(), by_class[c].begin() + take[c], by_class[c].end());
  }
  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

}  // namespace heartstack
