#include "smoothreg/numkit.hpp"

#include "smoothreg/error.hpp"
#include "smoothreg/rng.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

namespace smoothreg {

namespace {

// Cholesky solve of (A + jitter·I) x = b with escalating jitter on failure.
// `allow_jitter` is false for the unregularised system, which must be
// nonsingular as given.
Vector spd_solve(Matrix a, const Vector& b, bool allow_jitter) {
  const Index p = a.rows();
  Eigen::LLT<Matrix> llt(a);
  const bool ok = llt.info() == Eigen::Success && llt.rcond() > 1e-14;
  if (ok) return llt.solve(b);
  if (!allow_jitter) throw Error("ridge_solve: normal matrix is singular at alpha = 0");

  double jitter = 1e-10 * std::max(a.trace(), 1e-300) / static_cast<double>(p);
  for (int attempt = 0; attempt < 6; ++attempt, jitter *= 100.0) {
    a.diagonal().array() += jitter;
    llt.compute(a);
    if (llt.info() == Eigen::Success) return llt.solve(b);
  }
  throw Error("ridge_solve: Cholesky factorisation failed after jitter retries");
}

}  // namespace

RidgeSolution ridge_solve(const Matrix& design, const Vector& y, double alpha,
                          bool fit_intercept) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (n < 1 || p < 1) throw Error("ridge_solve: empty design matrix");
  if (y.size() != n) throw Error("ridge_solve: target length does not match design rows");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("ridge_solve: alpha must be finite and >= 0");
  if (!design.allFinite() || !y.allFinite()) throw Error("ridge_solve: non-finite input");

  Vector col_means = Vector::Zero(p);
  double y_mean = 0.0;
  Matrix centred;
  Vector yc;
  if (fit_intercept) {
    col_means = design.colwise().mean().transpose();
    y_mean = y.mean();
    centred = design.rowwise() - col_means.transpose();
    yc = y.array() - y_mean;
  }
  const Matrix& phi = fit_intercept ? centred : design;
  const Vector& target = fit_intercept ? yc : y;

  RidgeSolution sol;
  if (p > n && alpha > 0.0) {
    Matrix gram = Matrix::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
    gram.diagonal().array() += alpha;
    const Vector dual = spd_solve(std::move(gram), target, true);
    sol.weights = phi.transpose() * dual;
  } else {
    Matrix normal = Matrix::Zero(p, p);
    normal.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
    normal.triangularView<Eigen::StrictlyUpper>() = normal.transpose();
    normal.diagonal().array() += alpha;
    sol.weights = spd_solve(std::move(normal), phi.transpose() * target, alpha > 0.0);
  }
  sol.intercept = fit_intercept ? y_mean - col_means.dot(sol.weights) : 0.0;
  if (!sol.weights.allFinite() || !std::isfinite(sol.intercept)) {
    throw Error("ridge_solve: solution is not finite");
  }
  return sol;
}

KMeansResult kmeans(const Matrix& x, Index k, std::uint64_t seed, int max_iter) {
  const Index n = x.rows();
  const Index d = x.cols();
  if (k < 1) throw Error("kmeans: need at least one cluster");
  if (k > n) throw Error("kmeans: K=" + std::to_string(k) + " exceeds n=" + std::to_string(n));

  Rng rng(seed);
  Matrix centroids(k, d);
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());

  auto take = [&](Index c, Index row) {
    centroids.row(c) = x.row(row);
    chosen[static_cast<std::size_t>(row)] = true;
    for (Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i), (x.row(i) - x.row(row)).squaredNorm());
    }
  };

  take(0, static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index pick = -1;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (Index i = 0; i < n; ++i) {
        if (dist2(i) <= 0.0) continue;
        pick = i;
        u -= dist2(i);
        if (u < 0.0) break;
      }
    } else {
      std::vector<Index> free;
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      }
      pick = free[uniform_index(rng, free.size())];
    }
    take(c, pick);
  }

  KMeansResult result;
  result.labels.assign(static_cast<std::size_t>(n), -1);
  Vector point_dist(n);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    double sse = 0.0;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Index c = 0; c < k; ++c) {
        const double dc = (x.row(i) - centroids.row(c)).squaredNorm();
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (result.labels[static_cast<std::size_t>(i)] != best) changed = true;
      result.labels[static_cast<std::size_t>(i)] = best;
      point_dist(i) = best_d;
      sse += best_d;
    }
    result.sse_history.push_back(sse);
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, d);
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = result.labels[static_cast<std::size_t>(i)];
      sums.row(c) += x.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      Index far = 0;
      point_dist.maxCoeff(&far);
      centroids.row(c) = x.row(far);
      point_dist(far) = 0.0;
    }
  }
  result.centroids = std::move(centroids);
  return result;
}

std::vector<Index> knn_indices(const Matrix& x, const Vector& query, Index k,
                               std::optional<Index> exclude) {
  const Index n = x.rows();
  if (query.size() != x.cols()) throw Error("knn_indices: query dimension mismatch");
  const Index available = n - (exclude ? 1 : 0);
  if (k < 0 || k > available) {
    throw Error("knn_indices: k=" + std::to_string(k) + " exceeds the " +
                std::to_string(available) + " available points");
  }
  std::vector<std::pair<double, Index>> cand;
  cand.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (exclude && *exclude == i) continue;
    cand.emplace_back((x.row(i).transpose() - query).squaredNorm(), i);
  }
  std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
  std::vector<Index> out(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = cand[static_cast<std::size_t>(i)].second;
  return out;
}

std::vector<Index> knn_indices(const Matrix& x, Index row, Index k, bool exclude_self) {
  if (row < 0 || row >= x.rows()) throw Error("knn_indices: row out of range");
  return knn_indices(x, x.row(row).transpose(), k,
                     exclude_self ? std::optional<Index>(row) : std::nullopt);
}

OptimResult lbfgs_minimize(const Objective& objective, const Vector& x0,
                           const LbfgsOptions& options) {
  OptimResult result;
  result.x = x0;
  Vector grad(x0.size());
  double f = objective(result.x, grad);
  if (!std::isfinite(f) || !grad.allFinite()) {
    throw Error("lbfgs_minimize: objective is not finite at the starting point");
  }
  result.loss = f;
  result.loss_history.push_back(f);
  if (options.max_iter <= 0) return result;
  if (grad.norm() < options.grad_tol) {
    result.converged = true;
    return result;
  }

  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> memory;
  std::vector<double> alphas;
  Vector x_new(x0.size());
  Vector grad_new(x0.size());

  for (int iter = 1; iter <= options.max_iter; ++iter) {
    // Two-loop recursion.
    Vector dir = -grad;
    alphas.assign(memory.size(), 0.0);
    for (std::size_t i = memory.size(); i-- > 0;) {
      alphas[i] = memory[i].rho * memory[i].s.dot(dir);
      dir -= alphas[i] * memory[i].y;
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      dir *= last.s.dot(last.y) / last.y.squaredNorm();
    } else {
      dir /= std::max(1.0, grad.norm());
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].rho * memory[i].y.dot(dir);
      dir += (alphas[i] - beta) * memory[i].s;
    }
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -grad / std::max(1.0, grad.norm());
      slope = grad.dot(dir);
    }

    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= options.max_backtracks; ++bt, step *= options.backtrack) {
      x_new = result.x + step * dir;
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) && grad_new.allFinite() &&
          f_new <= f + options.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    Vector s = x_new - result.x;
    Vector y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (static_cast<int>(memory.size()) == options.memory) memory.pop_front();
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
    }
    result.x = x_new;
    grad = grad_new;
    f = f_new;
    result.loss = f;
    result.iterations = iter;
    result.loss_history.push_back(f);
    if (grad.norm() < options.grad_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace smoothreg
