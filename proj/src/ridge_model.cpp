#include "smoothreg/ridge_model.hpp"

#include "smoothreg/error.hpp"

namespace smoothreg {

RidgeModel ridge_fit(const Dataset& train, double alpha) {
  train.validate();
  if (!(alpha > 0.0)) throw Error("ridge_fit: alpha must be > 0");
  if (train.has_missing()) throw Error("ridge_fit: training data contains missing values");
  RidgeModel model;
  model.alpha = alpha;
  model.scaler = Standardizer::fit(train.features);
  model.solution = ridge_solve(model.scaler.apply(train.features), train.target, alpha, true);
  return model;
}

Vector ridge_predict(const RidgeModel& model, const Matrix& x) {
  if (x.cols() != model.scaler.means().size()) {
    throw Error("ridge_predict: expected " + std::to_string(model.scaler.means().size()) +
                " features, got " + std::to_string(x.cols()));
  }
  return model.solution.predict(model.scaler.apply(x));
}

}  // namespace smoothreg
