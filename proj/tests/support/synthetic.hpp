#pragma once

// Seeded generators for test data. None of this ships in the library.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "heartstack/data.hpp"
#include "heartstack/matrix.hpp"
#include "heartstack/rng.hpp"

namespace heartstack::testing {

/// Rows with plausible ranges and codes for all 11 features, where the
/// target depends on st_slope, chest pain, angina, st_depression and heart
/// rate roughly the way the clinical data does. `outliers` extra rows carry
/// extreme values.
Dataset synthetic_heart(std::size_t n, std::uint64_t seed, std::size_t outliers = 0);

std::string to_csv(const Dataset& ds, bool with_target = true);
void write_csv(const Dataset& ds, const std::filesystem::path& path, bool with_target = true);

/// Random real matrix with entries uniform in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Random labels with both classes present (for rows >= 2).
std::vector<int> random_labels(std::size_t rows, Rng& rng);

/// Features with no duplicated rows, so every labelling is consistent.
/// Values are drawn from {0..4}, so rows must not exceed 5^cols.
Matrix distinct_rows(std::size_t rows, std::size_t cols, Rng& rng);

/// A small labelled table: `rows` rows, values on a coarse integer grid to
/// provoke ties, both classes present.
Dataset tiny_dataset(std::size_t rows, std::uint64_t seed);

}  // namespace heartstack::testing
