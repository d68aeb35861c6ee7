#include "smoothreg/chebypoly.hpp"

#include "smoothreg/error.hpp"

#include <cmath>

namespace smoothreg {

TargetStats TargetStats::of(const Vector& y) {
  if (y.size() < 1) throw Error("target stats: empty target");
  TargetStats s;
  s.mean = y.mean();
  s.std = std::sqrt((y.array() - s.mean).square().mean());
  return s;
}

void TargetStats::clip(Vector& preds) const {
  const double lo = mean - 3.0 * std;
  const double hi = mean + 3.0 * std;
  preds = preds.cwiseMax(lo).cwiseMin(hi);
}

ChebyPolyModel chebypoly_fit(const Dataset& train, const ChebyBasisConfig& cfg, double alpha) {
  train.validate();
  if (!(alpha > 0.0)) throw Error("chebypoly_fit: alpha must be > 0");
  if (train.has_missing()) throw Error("chebypoly_fit: training data contains missing values");

  ChebyPolyModel model;
  model.basis = cfg;
  model.alpha = alpha;
  model.scaler = MinMaxScaler::fit(train.features, true);
  const Matrix scaled = model.scaler.apply(train.features);
  model.interaction_set = interaction_features(scaled, cfg);
  const DesignMatrix dm = build_design_matrix(scaled, cfg, model.interaction_set);

  // Column 0 is the constant; the intercept takes its role unpenalised.
  model.solution = ridge_solve(dm.values.rightCols(dm.values.cols() - 1), train.target, alpha, true);
  model.y_stats = TargetStats::of(train.target);
  return model;
}

Vector chebypoly_predict(const ChebyPolyModel& model, const Matrix& x) {
  if (x.cols() != model.n_features()) {
    throw Error("chebypoly_predict: expected " + std::to_string(model.n_features()) +
                " features, got " + std::to_string(x.cols()));
  }
  const Matrix scaled = model.scaler.apply(x);
  const DesignMatrix dm = build_design_matrix(scaled, model.basis, model.interaction_set);
  Vector preds = model.solution.predict(dm.values.rightCols(dm.values.cols() - 1));
  model.y_stats.clip(preds);
  return preds;
}

}  // namespace smoothreg
