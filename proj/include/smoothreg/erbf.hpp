#pragma once

#include "smoothreg/chebypoly.hpp"
#include "smoothreg/dataset.hpp"
#include "smoothreg/numkit.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace smoothreg {

enum class CenterInit { kLipschitz, kKMeans };
enum class WidthInit { kLocalRidge, kLocalVariance };

struct ErbfConfig {
  /// nullopt selects the automatic heuristic.
  std::optional<Index> n_rbf;
  double alpha = 1.0;
  CenterInit center_init = CenterInit::kLipschitz;
  WidthInit width_init = WidthInit::kLocalRidge;
  int width_optim_iters = 30;
  /// Re-solve the output weights at every width-objective evaluation. When
  /// false they stay at the solution for the initial widths until the end.
  bool resolve_weights_in_loop = true;
  Index lipschitz_k = 5;
  double lipschitz_eps = 1e-12;
  double lipschitz_clip_pct = 99.0;
  std::uint64_t seed = 42;
};

/// Gaussian network with a separate width per centre and feature.
struct ErbfModel {
  Matrix centers;  // K×d, standardized feature space
  Matrix widths;   // K×d, strictly positive
  Vector weights;  // K
  double bias = 0.0;
  Standardizer feature_scaler;
  TargetStats y_stats;
  ErbfConfig config;

  Index n_centers() const { return centers.rows(); }
};

/// Training-time diagnostics of the width optimisation stage.
struct ErbfFitReport {
  double mse_before_optim = 0.0;  // initial widths, first weight solve
  double mse_after_optim = 0.0;   // objective at the optimised widths
  double mse_final = 0.0;         // optimised widths, re-solved weights
  OptimResult optim;
};

/// clip(max(40, 2d), 20, min(200, ⌊n/10⌋)); the upper bound wins if the
/// bounds cross.
Index auto_k(Index n, Index d);

/// Local Lipschitz estimate per row from its `k` nearest neighbours, capped
/// at the given percentile.
Vector estimate_lipschitz(const Matrix& x, const Vector& y, Index k, double eps, double clip_pct);

/// Linear-interpolated percentile (0–100) of `values`.
double percentile(const Vector& values, double pct);

/// Weighted sampling of `k` distinct rows with probability proportional to
/// `weights`; falls back to uniform over the rest once the positive weights
/// are exhausted.
std::vector<Index> weighted_sample_without_replacement(const Vector& weights, Index k,
                                                       std::uint64_t seed);

Matrix place_centers(const Matrix& x, const Vector& y, Index k, const ErbfConfig& config);

/// Neighbourhood size for width initialisation: min(100, ⌊n/K⌋) floored at 10
/// and capped at n.
Index width_neighbourhood(Index n, Index k);

Matrix init_widths(const Matrix& x, const Vector& y, const Matrix& centers, WidthInit method);

inline constexpr double kLocalRidgePenalty = 1e-3;
inline constexpr double kBetaFloor = 1e-8;
inline constexpr double kWidthCap = 1e3;
inline constexpr double kLocalStdFloor = 1e-3;

/// n×K activation matrix.
Matrix rbf_activations(const Matrix& x, const Matrix& centers, const Matrix& widths);

/// Training MSE with log-widths `theta` (K·d, row-major by centre) and the
/// gradient with respect to `theta`.
double erbf_loss_and_grad(const Vector& theta, const Matrix& x, const Vector& y,
                          const Matrix& centers, const Vector& weights, double bias, Vector& grad);

ErbfModel erbf_fit(const Dataset& train, const ErbfConfig& config, ErbfFitReport* report = nullptr);

Vector erbf_predict(const ErbfModel& model, const Matrix& x);

}  // namespace smoothreg
