#include "smoothreg/erbf.hpp"

#include "smoothreg/error.hpp"
#include "smoothreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smoothreg {

Index auto_k(Index n, Index d) {
  const Index hi = std::min<Index>(200, n / 10);
  const Index v = std::max<Index>(40, 2 * d);
  if (hi < 20) return hi;
  return std::clamp<Index>(v, 20, hi);
}

double percentile(const Vector& values, double pct) {
  if (values.size() == 0) throw Error("percentile: empty input");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

Vector estimate_lipschitz(const Matrix& x, const Vector& y, Index k, double eps, double clip_pct) {
  const Index n = x.rows();
  if (y.size() != n) throw Error("estimate_lipschitz: target length mismatch");
  if (n <= k) {
    throw Error("estimate_lipschitz: need more than k=" + std::to_string(k) + " rows, got " +
                std::to_string(n));
  }
  Vector lip(n);
  for (Index i = 0; i < n; ++i) {
    double best = 0.0;
    for (Index j : knn_indices(x, i, k, true)) {
      const double dist = (x.row(i) - x.row(j)).norm();
      best = std::max(best, std::abs(y(i) - y(j)) / (dist + eps));
    }
    lip(i) = best;
  }
  const double cap = percentile(lip, clip_pct);
  return lip.cwiseMin(cap);
}

std::vector<Index> weighted_sample_without_replacement(const Vector& weights, Index k,
                                                       std::uint64_t seed) {
  const Index n = weights.size();
  if (k > n) throw Error("weighted sampling: k exceeds population");
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw Error("weighted sampling: weights must be finite and non-negative");
  }
  Rng rng(seed);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index draw = 0; draw < k; ++draw) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) total += weights(i);
    }
    Index pick = -1;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)] || weights(i) <= 0.0) continue;
        pick = i;
        u -= weights(i);
        if (u < 0.0) break;
      }
    } else {
      auto r = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n - draw)));
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (r-- == 0) {
          pick = i;
          break;
        }
      }
    }
    taken[static_cast<std::size_t>(pick)] = true;
    out.push_back(pick);
  }
  return out;
}

Matrix place_centers(const Matrix& x, const Vector& y, Index k, const ErbfConfig& config) {
  const Index n = x.rows();
  if (k < 1 || k > n) {
    throw Error("place_centers: K=" + std::to_string(k) + " must lie in [1, n=" + std::to_string(n) + "]");
  }
  if (config.center_init == CenterInit::kKMeans) return kmeans(x, k, config.seed).centroids;

  const Vector lip = estimate_lipschitz(x, y, config.lipschitz_k, config.lipschitz_eps,
                                        config.lipschitz_clip_pct);
  const auto rows = weighted_sample_without_replacement(lip, k, config.seed);
  Matrix centers(k, x.cols());
  for (Index c = 0; c < k; ++c) centers.row(c) = x.row(rows[static_cast<std::size_t>(c)]);
  return centers;
}

Index width_neighbourhood(Index n, Index k) {
  const Index kn = std::max<Index>(10, std::min<Index>(100, n / std::max<Index>(k, 1)));
  return std::min(kn, n);
}

Matrix init_widths(const Matrix& x, const Vector& y, const Matrix& centers, WidthInit method) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index k = centers.rows();
  if (n < 10) throw Error("init_widths: need at least 10 rows");
  if (centers.cols() != d) throw Error("init_widths: centre dimension mismatch");
  const Index kn = width_neighbourhood(n, k);
  if (kn < 2) throw Error("init_widths: neighbourhood smaller than 2");

  const double root_d = std::sqrt(static_cast<double>(d));
  const double tau = 1.5 * root_d;
  Matrix widths(k, d);
  Matrix local(kn, d);
  Vector local_y(kn);
  for (Index c = 0; c < k; ++c) {
    const auto idx = knn_indices(x, centers.row(c).transpose(), kn);
    for (Index r = 0; r < kn; ++r) {
      local.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
      local_y(r) = y(idx[static_cast<std::size_t>(r)]);
    }
    const Vector mean = local.colwise().mean().transpose();
    Vector var(d);
    for (Index j = 0; j < d; ++j) {
      var(j) = std::max((local.col(j).array() - mean(j)).square().mean(), kLocalStdFloor * kLocalStdFloor);
    }

    if (method == WidthInit::kLocalVariance) {
      widths.row(c) = (var.array().sqrt() * root_d).transpose();
      continue;
    }

    // Local ridge on standardized neighbourhood data.
    Matrix zx(kn, d);
    for (Index j = 0; j < d; ++j) zx.col(j) = (local.col(j).array() - mean(j)) / std::sqrt(var(j));
    const double y_mean = local_y.mean();
    const double y_std = std::sqrt((local_y.array() - y_mean).square().mean());
    Vector beta = Vector::Zero(d);
    if (y_std > 0.0) {
      const Vector zy = (local_y.array() - y_mean) / y_std;
      beta = ridge_solve(zx, zy, kLocalRidgePenalty, true).weights;
    }
    for (Index j = 0; j < d; ++j) {
      const double b = std::max(std::abs(beta(j)), kBetaFloor);
      widths(c, j) = std::min(tau * std::sqrt(var(j) / b), kWidthCap);
    }
  }
  return widths;
}

Matrix rbf_activations(const Matrix& x, const Matrix& centers, const Matrix& widths) {
  const Index n = x.rows();
  const Index k = centers.rows();
  if (x.cols() != centers.cols() || widths.rows() != k || widths.cols() != centers.cols()) {
    throw Error("rbf_activations: shape mismatch");
  }
  Matrix phi(n, k);
  Vector acc(n);
  for (Index c = 0; c < k; ++c) {
    acc.setZero();
    for (Index j = 0; j < x.cols(); ++j) {
      // Zero offsets contribute 0 even when the width underflows to 0.
      const auto diff = x.col(j).array() - centers(c, j);
      acc.array() += 0.5 * (diff != 0.0).select((diff / widths(c, j)).square(), 0.0);
    }
    // Vectorised exp can return denormals for -inf; treat those as exactly 0.
    phi.col(c) = (acc.array() < 708.0).select((-acc.array()).exp(), 0.0);
  }
  return phi;
}

double erbf_loss_and_grad(const Vector& theta, const Matrix& x, const Vector& y,
                          const Matrix& centers, const Vector& weights, double bias, Vector& grad) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index k = centers.rows();
  if (theta.size() != k * d) throw Error("erbf_loss_and_grad: theta has the wrong length");
  for (Index t = 0; t < theta.size(); ++t) {
    if (!std::isfinite(theta(t))) throw Error("erbf_loss_and_grad: non-finite log-width at index " + std::to_string(t));
  }

  Matrix widths(k, d);
  for (Index c = 0; c < k; ++c) {
    for (Index j = 0; j < d; ++j) widths(c, j) = std::exp(theta(c * d + j));
  }
  const Matrix phi = rbf_activations(x, centers, widths);
  const Vector resid = (phi * weights).array() + bias - y.array();
  const double mse = resid.squaredNorm() / static_cast<double>(n);
  if (!std::isfinite(mse)) throw Error("erbf_loss_and_grad: non-finite loss");

  grad.resize(k * d);
  Vector v(n);
  for (Index c = 0; c < k; ++c) {
    v = resid.cwiseProduct(phi.col(c));
    const double scale = 2.0 / static_cast<double>(n) * weights(c);
    for (Index j = 0; j < d; ++j) {
      double s = 0.0;
      for (Index i = 0; i < n; ++i) {
        // φ underflowing to 0 while (x−c)/σ overflows has limit 0.
        const double diff = x(i, j) - centers(c, j);
        if (v(i) == 0.0 || diff == 0.0) continue;
        const double z = diff / widths(c, j);
        s += v(i) * z * z;
      }
      grad(c * d + j) = scale * s;
    }
  }
  for (Index t = 0; t < grad.size(); ++t) {
    if (!std::isfinite(grad(t))) throw Error("erbf_loss_and_grad: non-finite gradient at index " + std::to_string(t));
  }
  return mse;
}

ErbfModel erbf_fit(const Dataset& train, const ErbfConfig& config, ErbfFitReport* report) {
  train.validate();
  if (train.n() < 20) throw Error("erbf_fit: need at least 20 training rows");
  if (train.has_missing()) throw Error("erbf_fit: training data contains missing values");
  if (!(config.alpha > 0.0)) throw Error("erbf_fit: alpha must be > 0");

  ErbfModel model;
  model.config = config;
  model.feature_scaler = Standardizer::fit(train.features);
  const Matrix xs = model.feature_scaler.apply(train.features);
  const Vector& y = train.target;
  const Index n = train.n();
  const Index d = train.d();

  const Index k = config.n_rbf ? *config.n_rbf : auto_k(n, d);
  if (k < 1 || k > n) throw Error("erbf_fit: K=" + std::to_string(k) + " is not in [1, n]");

  model.centers = place_centers(xs, y, k, config);
  const Matrix widths0 = init_widths(xs, y, model.centers, config.width_init);

  const RidgeSolution first = ridge_solve(rbf_activations(xs, model.centers, widths0), y, config.alpha, true);

  Vector theta0(k * d);
  for (Index c = 0; c < k; ++c) {
    for (Index j = 0; j < d; ++j) theta0(c * d + j) = std::log(widths0(c, j));
  }
  Matrix trial_widths(k, d);
  const Objective objective = [&](const Vector& theta, Vector& grad) {
    if (!config.resolve_weights_in_loop) {
      return erbf_loss_and_grad(theta, xs, y, model.centers, first.weights, first.intercept, grad);
    }
    for (Index c = 0; c < k; ++c) {
      for (Index j = 0; j < d; ++j) trial_widths(c, j) = std::exp(theta(c * d + j));
    }
    const RidgeSolution sol = ridge_solve(rbf_activations(xs, model.centers, trial_widths), y, config.alpha, true);
    return erbf_loss_and_grad(theta, xs, y, model.centers, sol.weights, sol.intercept, grad);
  };
  LbfgsOptions opts;
  opts.max_iter = config.width_optim_iters;
  OptimResult optim = lbfgs_minimize(objective, theta0, opts);

  model.widths.resize(k, d);
  for (Index c = 0; c < k; ++c) {
    for (Index j = 0; j < d; ++j) model.widths(c, j) = std::exp(optim.x(c * d + j));
  }
  const Matrix phi = rbf_activations(xs, model.centers, model.widths);
  const RidgeSolution final_sol = ridge_solve(phi, y, config.alpha, true);
  model.weights = final_sol.weights;
  model.bias = final_sol.intercept;
  model.y_stats = TargetStats::of(y);

  if (report) {
    report->mse_before_optim = optim.loss_history.front();
    report->mse_after_optim = optim.loss;
    report->mse_final = ((phi * model.weights).array() + model.bias - y.array()).square().mean();
    report->optim = std::move(optim);
  }
  return model;
}

Vector erbf_predict(const ErbfModel& model, const Matrix& x) {
  if (x.cols() != model.centers.cols()) {
    throw Error("erbf_predict: expected " + std::to_string(model.centers.cols()) + " features, got " +
                std::to_string(x.cols()));
  }
  const Matrix xs = model.feature_scaler.apply(x);
  Vector preds = (rbf_activations(xs, model.centers, model.widths) * model.weights).array() + model.bias;
  model.y_stats.clip(preds);
  return preds;
}

}  // namespace smoothreg
