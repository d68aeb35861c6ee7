#include "smoothreg/metrics.hpp"

#include "smoothreg/error.hpp"

#include <cmath>

namespace smoothreg {

double r2(const Vector& y_true, const Vector& y_pred) {
  if (y_true.size() != y_pred.size()) throw Error("r2: length mismatch");
  if (y_true.size() < 2) throw Error("r2: need at least two values");
  const double mean = y_true.mean();
  const double ss_res = (y_true - y_pred).squaredNorm();
  const double ss_tot = (y_true.array() - mean).square().sum();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : kR2Floor;
  return std::max(1.0 - ss_res / ss_tot, kR2Floor);
}

double adjusted_r2(double r2_value, Index n, Index d) {
  if (n < 2) throw Error("adjusted_r2: need n >= 2");
  if (n <= d + 1) return r2_value;
  const double adj = 1.0 - (1.0 - r2_value) * static_cast<double>(n - 1) / static_cast<double>(n - d - 1);
  return std::max(adj, kR2Floor);
}

Vector clip_predictions(const Vector& preds, const Vector& y_train) {
  if (y_train.size() < 1) throw Error("clip_predictions: empty training target");
  const double mean = y_train.mean();
  const double sigma = std::sqrt((y_train.array() - mean).square().mean());
  const double lo = y_train.minCoeff() - 3.0 * sigma;
  const double hi = y_train.maxCoeff() + 3.0 * sigma;
  return preds.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace smoothreg
