#pragma once

#include "smoothreg/cheby_basis.hpp"
#include "smoothreg/dataset.hpp"
#include "smoothreg/numkit.hpp"

#include <vector>

namespace smoothreg {

/// Mean and population standard deviation of a training target.
struct TargetStats {
  double mean = 0.0;
  double std = 0.0;

  static TargetStats of(const Vector& y);
  /// Clamps every entry to [mean - 3·std, mean + 3·std].
  void clip(Vector& preds) const;
};

/// Global Chebyshev regressor: min-max scale, expand, ridge.
struct ChebyPolyModel {
  MinMaxScaler scaler;
  ChebyBasisConfig basis;
  std::vector<Index> interaction_set;
  double alpha = 1.0;
  RidgeSolution solution;
  TargetStats y_stats;

  Index n_features() const { return scaler.mins().size(); }
};

ChebyPolyModel chebypoly_fit(const Dataset& train, const ChebyBasisConfig& cfg, double alpha);

Vector chebypoly_predict(const ChebyPolyModel& model, const Matrix& x);

}  // namespace smoothreg
