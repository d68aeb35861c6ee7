#pragma once

#include "smoothreg/dataset.hpp"

namespace smoothreg {

/// Stand-in for -inf when the target is constant but the fit is not exact.
inline constexpr double kR2Floor = -1e9;

double r2(const Vector& y_true, const Vector& y_pred);

/// 1 − (1−r²)(n−1)/(n−d−1), or r² itself when n ≤ d+1.
double adjusted_r2(double r2_value, Index n, Index d);

/// Clamps to [min(y) − 3σ, max(y) + 3σ] with σ the population std of y.
Vector clip_predictions(const Vector& preds, const Vector& y_train);

}  // namespace smoothreg
