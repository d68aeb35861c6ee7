#pragma once

#include "smoothreg/dataset.hpp"
#include "smoothreg/numkit.hpp"

namespace smoothreg {

/// Linear ridge baseline on standardized features.
struct RidgeModel {
  Standardizer scaler;
  RidgeSolution solution;
  double alpha = 1.0;

  /// Slopes in the raw feature units.
  Vector raw_coefficients() const { return solution.weights.cwiseQuotient(scaler.stds()); }
  double raw_intercept() const { return solution.intercept - raw_coefficients().dot(scaler.means()); }
};

RidgeModel ridge_fit(const Dataset& train, double alpha);

Vector ridge_predict(const RidgeModel& model, const Matrix& x);

}  // namespace smoothreg
