#pragma once

#include "otp/common.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace otp {

struct Dataset {
  std::string name;
  Matrix features;
  std::vector<int> labels;  // dense class indices, first-appearance order
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
};

struct CsvOptions {
  bool standardize = true;  // z-score each feature over the whole file
  char delimiter = ',';
};

/// Reads a headed CSV. Every column other than `label_column` must be numeric.
/// Rejects missing or non-numeric cells (reporting row and column) and files
/// with fewer than two classes. Constant features standardize to 0.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 const CsvOptions& options = {});

/// Reads a headed CSV of numeric columns only.
Matrix load_points_csv(const std::filesystem::path& path, char delimiter = ',');

struct SplitMask {
  std::vector<std::size_t> labeled;    // ascending
  std::vector<std::size_t> unlabeled;  // ascending
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Stratified labeled/unlabeled split per seed. The labeled total is
/// round(fraction * n); it is apportioned over classes by largest remainder
/// of fraction * class_size, with at least one point per class.
std::vector<SplitMask> make_splits(const Dataset& dataset, double fraction,
                                   std::span<const std::uint64_t> seeds);
SplitMask make_split(const Dataset& dataset, double fraction, std::uint64_t seed);

Matrix select_rows(const Matrix& points, std::span<const std::size_t> rows);
std::vector<int> select(std::span<const int> values, std::span<const std::size_t> rows);

}  // namespace otp
