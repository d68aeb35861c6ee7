#pragma once

#include "smoothreg/dataset.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace smoothreg {

struct RidgeSolution {
  Vector weights;
  double intercept = 0.0;

  Vector predict(const Matrix& design) const {
    return (design * weights).array() + intercept;
  }
};

/// Solves (PᵀP + αI)w = Pᵀy. With `fit_intercept` the columns and target are
/// centred first so the intercept is not penalised. Uses a Cholesky
/// factorisation of the primal normal matrix, or of the n×n Gram matrix when
/// p > n and α > 0 (same solution, smaller system).
RidgeSolution ridge_solve(const Matrix& design, const Vector& y, double alpha,
                          bool fit_intercept);

struct KMeansResult {
  Matrix centroids;
  std::vector<Index> labels;
  /// Within-cluster SSE after every Lloyd assignment step.
  std::vector<double> sse_history;
};

/// Lloyd's algorithm from a seeded k-means++ start. Empty clusters are
/// re-seeded to the point farthest from its centroid.
KMeansResult kmeans(const Matrix& x, Index k, std::uint64_t seed, int max_iter = 100);

/// Indices of the `k` rows nearest to `query` (ties to lower index).
std::vector<Index> knn_indices(const Matrix& x, const Vector& query, Index k,
                               std::optional<Index> exclude = std::nullopt);

/// Convenience overload: neighbours of row `row`, optionally excluding itself.
std::vector<Index> knn_indices(const Matrix& x, Index row, Index k, bool exclude_self);

struct OptimResult {
  Vector x;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Loss of every accepted iterate, starting with x0.
  std::vector<double> loss_history;
};

/// Returns the loss and writes the gradient into the second argument.
using Objective = std::function<double(const Vector&, Vector&)>;

struct LbfgsOptions {
  int max_iter = 100;
  int memory = 10;
  double grad_tol = 1e-8;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 50;
};

/// Unconstrained L-BFGS (two-loop recursion) with an Armijo backtracking
/// line search.
OptimResult lbfgs_minimize(const Objective& objective, const Vector& x0,
                           const LbfgsOptions& options = {});

}  // namespace smoothreg
