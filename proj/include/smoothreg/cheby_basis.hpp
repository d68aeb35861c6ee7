#pragma once

#include "smoothreg/dataset.hpp"

#include <vector>

namespace smoothreg {

struct ChebyBasisConfig {
  int complexity = 3;
  bool include_interactions = false;
  /// 1: raw products x_i·x_j only. 2: products plus T₂(x_i·x_j).
  int max_interaction_complexity = 1;
  /// Above this many features only the top half by variance take part in
  /// interactions.
  Index high_dim_threshold = 30;
};

struct BasisColumn {
  enum class Kind { kConstant, kUnivariate, kProduct, kProductT2 };
  Kind kind = Kind::kConstant;
  Index feature = 0;  // first feature for products
  Index other = -1;   // second feature for products
  int degree = 0;
};

struct DesignMatrix {
  Matrix values;
  std::vector<BasisColumn> columns;
};

/// T_n(x) by the three-term recurrence.
double cheb_eval(int degree, double x);

/// Features allowed to take part in pairwise interactions, in ascending
/// index order. `x_scaled` is the scaled training matrix.
std::vector<Index> interaction_features(const Matrix& x_scaled, const ChebyBasisConfig& cfg);

/// Expands scaled inputs into [T₀, T₁(x₁)…T_c(x₁), …, T₁(x_d)…T_c(x_d)]
/// followed by the interaction columns over `eligible`.
DesignMatrix build_design_matrix(const Matrix& x_scaled, const ChebyBasisConfig& cfg,
                                 const std::vector<Index>& eligible);

/// Training-time form: derives the eligible interaction set from `x_scaled`.
DesignMatrix build_design_matrix(const Matrix& x_scaled, const ChebyBasisConfig& cfg);

}  // namespace smoothreg
