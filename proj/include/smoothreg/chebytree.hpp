#pragma once

#include "smoothreg/cart.hpp"
#include "smoothreg/chebypoly.hpp"

#include <variant>
#include <vector>

namespace smoothreg {

struct ConstantLeaf {
  double value = 0.0;
};

using LeafModel = std::variant<ChebyPolyModel, ConstantLeaf>;

struct ChebyTreeParams {
  int complexity = 2;
  int max_depth = 3;
  SampleThreshold min_samples_leaf = SampleThreshold::fraction(0.05);
  double alpha = 1.0;
};

/// CART routing with an independent univariate Chebyshev fit in each leaf.
struct ChebyTreeModel {
  RegressionTree tree;
  std::vector<LeafModel> leaf_models;  // indexed by leaf id
  ChebyTreeParams params;
  TargetStats y_stats;
};

/// Leaves with fewer rows than this keep the tree's constant prediction.
Index chebytree_fallback_threshold(int complexity);

ChebyTreeModel chebytree_fit(const Dataset& train, const ChebyTreeParams& params);

Vector chebytree_predict(const ChebyTreeModel& model, const Matrix& x);

}  // namespace smoothreg
