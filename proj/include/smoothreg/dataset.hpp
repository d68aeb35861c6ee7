#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smoothreg {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-major feature matrix plus target. Missing values are NaN until
/// imputed.
struct Dataset {
  Matrix features;
  Vector target;
  std::vector<std::string> feature_names;

  Index n() const { return features.rows(); }
  Index d() const { return features.cols(); }

  /// Throws unless shapes agree and n >= 2, d >= 1.
  void validate() const;
  bool has_missing() const;

  Dataset subset(std::span<const Index> rows) const;
};

/// Assignment of each row to one of `k` folds.
struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignments;

  std::vector<Index> test_indices(int fold) const;
  std::vector<Index> train_indices(int fold) const;
  std::vector<Index> fold_sizes() const;
};

class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-12;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;

  const Vector& means() const { return means_; }
  const Vector& stds() const { return stds_; }

  Standardizer() = default;
  Standardizer(Vector means, Vector stds);

 private:
  Vector means_;
  Vector stds_;
};

/// Maps each training column's [min, max] onto [-1, 1]. Constant columns map
/// to 0.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Matrix& x, bool clip = true);
  Matrix apply(const Matrix& x) const;

  const Vector& mins() const { return mins_; }
  const Vector& maxs() const { return maxs_; }
  bool clip() const { return clip_; }

  MinMaxScaler() = default;
  MinMaxScaler(Vector mins, Vector maxs, bool clip);

 private:
  Vector mins_;
  Vector maxs_;
  bool clip_ = true;
};

/// Reads a header-first CSV. Empty feature cells become NaN, rows with an
/// empty target are dropped, and non-numeric cells are rejected.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);

/// Reads the named feature columns in the given order; other columns are
/// ignored. Empty cells become NaN.
Matrix load_csv_columns(const std::filesystem::path& path, const std::vector<std::string>& columns);

void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const std::string& target_name = "target");

/// Replaces NaNs in `apply_to` with per-column medians of `train`.
Dataset impute_median(const Dataset& train, const Dataset& apply_to);

/// Median of the non-NaN entries, averaging the middle pair for even counts.
std::optional<double> nan_median(std::span<const double> values);

/// Drops columns whose modal value covers strictly more than the threshold
/// fraction of rows.
Dataset drop_quasi_constant(const Dataset& ds, double mode_freq_threshold = 0.95);

FoldPlan kfold_split(Index n, int k, std::uint64_t seed);

int inner_fold_count(Index n_outer_train);

/// Seeded sampling of `max_samples` rows without replacement; returns the
/// input unchanged when it is already small enough.
Dataset subsample(const Dataset& ds, Index max_samples, std::uint64_t seed);

}  // namespace smoothreg
