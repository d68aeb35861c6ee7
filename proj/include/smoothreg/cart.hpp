#pragma once

#include "smoothreg/dataset.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace smoothreg {

/// Either an absolute row count or a fraction of the training rows.
struct SampleThreshold {
  std::variant<std::int64_t, double> value = std::int64_t{1};

  static SampleThreshold count(std::int64_t c) { return {c}; }
  static SampleThreshold fraction(double f) { return {f}; }

  /// Fractions resolve to ⌈f·n⌉, floored at 1.
  Index resolve(Index n) const;
};

struct TreeNode {
  Index feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean training target of the rows reaching the node
  Index n_samples = 0;
  int leaf_id = -1;
};

struct SplitCandidate {
  Index feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // reduction in summed squared error
};

/// Axis-aligned variance-reduction regression tree. Rows go left iff
/// x[feature] <= threshold.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  /// Training rows per leaf, indexed by leaf id.
  std::vector<std::vector<Index>> leaf_rows;
  int max_depth = 1;
  Index min_samples_leaf = 1;
  Index min_samples_split = 2;
  Index n_features = 0;

  int n_leaves() const { return static_cast<int>(leaf_rows.size()); }
  int depth() const;
};

struct CartParams {
  int max_depth = 5;
  SampleThreshold min_samples_leaf = SampleThreshold::count(1);
  SampleThreshold min_samples_split = SampleThreshold::count(2);
};

RegressionTree cart_fit(const Dataset& train, const CartParams& params);

/// Best split of `rows` by incremental sweep; feature == -1 when no split
/// with positive gain satisfies the leaf-size constraint.
SplitCandidate best_split(const Matrix& x, const Vector& y, std::span<const Index> rows,
                          Index min_samples_leaf);

int cart_route(const RegressionTree& tree, std::span<const double> point);
int cart_route(const RegressionTree& tree, const Matrix& x, Index row);

Vector cart_predict(const RegressionTree& tree, const Matrix& x);

}  // namespace smoothreg
