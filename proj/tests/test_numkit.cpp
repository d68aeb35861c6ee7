#include "doctest.h"

#include "smoothreg/error.hpp"
#include "smoothreg/numkit.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

using namespace smoothreg;

namespace {

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

double sse(const Matrix& x, const Matrix& centroids, const std::vector<Index>& labels) {
  double s = 0.0;
  for (Index i = 0; i < x.rows(); ++i) s += (x.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return s;
}

}  // namespace

TEST_CASE("ridge_solve identity design") {
  const Matrix eye = Matrix::Identity(2, 2);
  Vector y(2);
  y << 1, 2;
  const RidgeSolution a = ridge_solve(eye, y, 0.0, false);
  CHECK(a.weights(0) == doctest::Approx(1.0));
  CHECK(a.weights(1) == doctest::Approx(2.0));
  CHECK(a.intercept == 0.0);
  const RidgeSolution b = ridge_solve(eye, y, 1.0, false);
  CHECK(b.weights(0) == doctest::Approx(0.5));
  CHECK(b.weights(1) == doctest::Approx(1.0));
}

TEST_CASE("ridge_solve matches the normal-equations oracle on a 20x5 system") {
  Rng rng(20);
  const Matrix x = testutil::random_matrix(rng, 20, 5);
  const Vector y = testutil::random_vector(rng, 20);
  for (bool intercept : {false, true}) {
    const RidgeSolution got = ridge_solve(x, y, 0.3, intercept);
    const oracle::Ridge want = oracle::ridge(x, y, 0.3, intercept);
    CHECK(rel_err(got.weights, want.weights) < 1e-8);
    CHECK(std::abs(got.intercept - want.intercept) < 1e-8);
  }
}

TEST_CASE("property: ridge_solve residual of the normal equations") {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 2 + static_cast<Index>(uniform_index(rng, 40));
    const Index p = 1 + static_cast<Index>(uniform_index(rng, 12));
    const double alpha = std::exp(uniform(rng, std::log(1e-3), std::log(1e2)));
    const Matrix x = testutil::random_matrix(rng, n, p, -2, 2);
    const Vector y = testutil::random_vector(rng, n, -5, 5);
    const RidgeSolution s = ridge_solve(x, y, alpha, true);
    const Matrix xc = x.rowwise() - x.colwise().mean();
    const Vector yc = y.array() - y.mean();
    const Vector resid = (xc.transpose() * xc + alpha * Matrix::Identity(p, p)) * s.weights - xc.transpose() * yc;
    REQUIRE(resid.norm() <= 1e-8 * (1.0 + y.norm()));
    REQUIRE(std::abs(s.intercept - (y.mean() - x.colwise().mean().dot(s.weights))) < 1e-9 * (1.0 + y.norm()));
  }
}

TEST_CASE("property: ridge shrinkage is monotone in alpha") {
  Rng rng(22);
  for (int rep = 0; rep < 200; ++rep) {
    const Index p = 1 + static_cast<Index>(uniform_index(rng, 8));
    const Index n = p + 5 + static_cast<Index>(uniform_index(rng, 30));
    const Matrix x = testutil::random_matrix(rng, n, p);
    const Vector y = testutil::random_vector(rng, n, -3, 3);
    double a1 = std::exp(uniform(rng, -7.0, 5.0));
    double a2 = std::exp(uniform(rng, -7.0, 5.0));
    if (a1 > a2) std::swap(a1, a2);
    const double n1 = ridge_solve(x, y, a1, true).weights.norm();
    const double n2 = ridge_solve(x, y, a2, true).weights.norm();
    REQUIRE(n2 <= n1 + 1e-10);
  }
}

TEST_CASE("ridge_solve wide systems use the dual form") {
  Rng rng(23);
  const Matrix x = testutil::random_matrix(rng, 8, 30);
  const Vector y = testutil::random_vector(rng, 8);
  const RidgeSolution got = ridge_solve(x, y, 0.7, true);
  const oracle::Ridge want = oracle::ridge(x, y, 0.7, true);
  CHECK(rel_err(got.weights, want.weights) < 1e-8);
  CHECK(std::abs(got.intercept - want.intercept) < 1e-8);
}

TEST_CASE("ridge_solve errors") {
  Matrix x(3, 2);
  x << 1, 2, 2, 4, 3, 6;  // rank 1
  const Vector y = Vector::Ones(3);
  CHECK_THROWS_AS(ridge_solve(x, y, 0.0, false), Error);
  Matrix bad = Matrix::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ridge_solve(bad, y, 1.0, false), Error);
  CHECK_THROWS_AS(ridge_solve(Matrix::Identity(2, 2), y, 1.0, false), Error);
  CHECK_THROWS_AS(ridge_solve(Matrix::Identity(2, 2), Vector::Ones(2), -1.0, false), Error);
}

TEST_CASE("kmeans separates two blobs") {
  Matrix x(20, 2);
  for (Index i = 0; i < 20; ++i) x.row(i).setConstant(i < 10 ? 0.0 : 10.0);
  const KMeansResult r = kmeans(x, 2, 1);
  Matrix c = r.centroids;
  if (c(0, 0) > c(1, 0)) c.row(0).swap(c.row(1));
  CHECK(c.row(0).norm() < 1e-9);
  CHECK((c.row(1).array() - 10.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("kmeans with K = n returns the rows") {
  Rng rng(30);
  const Matrix x = testutil::random_matrix(rng, 12, 3);
  const KMeansResult r = kmeans(x, 12, 4);
  std::vector<int> used(12, 0);
  for (Index c = 0; c < 12; ++c) {
    for (Index i = 0; i < 12; ++i) {
      if ((r.centroids.row(c) - x.row(i)).norm() < 1e-12) ++used[static_cast<std::size_t>(i)];
    }
  }
  for (int u : used) CHECK(u == 1);
}

TEST_CASE("kmeans beats random assignments on blobs") {
  Rng rng(31);
  Matrix x(30, 2);
  const double centres[3][2] = {{0, 0}, {5, 5}, {-5, 5}};
  for (Index i = 0; i < 30; ++i) {
    for (Index j = 0; j < 2; ++j) x(i, j) = centres[i % 3][j] + 0.5 * standard_normal(rng);
  }
  const KMeansResult r = kmeans(x, 3, 42);
  const double best = sse(x, r.centroids, r.labels);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<Index> labels(30);
    Matrix cent = Matrix::Zero(3, 2);
    Vector counts = Vector::Zero(3);
    for (Index i = 0; i < 30; ++i) {
      labels[static_cast<std::size_t>(i)] = static_cast<Index>(uniform_index(rng, 3));
      cent.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1;
    }
    for (Index c = 0; c < 3; ++c) {
      if (counts(c) > 0) cent.row(c) /= counts(c);
    }
    CHECK(best <= sse(x, cent, labels));
  }
}

TEST_CASE("property: kmeans SSE never increases and is deterministic") {
  Rng rng(32);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 5 + static_cast<Index>(uniform_index(rng, 40));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 4));
    const Index k = 1 + static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(std::min<Index>(n, 8))));
    const Matrix x = testutil::random_matrix(rng, n, d, -3, 3);
    const std::uint64_t seed = rng();
    const KMeansResult r = kmeans(x, k, seed);
    for (std::size_t i = 1; i < r.sse_history.size(); ++i) {
      REQUIRE(r.sse_history[i] <= r.sse_history[i - 1] + 1e-9);
    }
    REQUIRE(r.centroids.allFinite());
    REQUIRE(kmeans(x, k, seed).centroids == r.centroids);
  }
}

TEST_CASE("kmeans rejects K > n") {
  CHECK_THROWS_AS(kmeans(Matrix::Zero(3, 1), 4, 0), Error);
}

TEST_CASE("knn_indices") {
  Matrix x(4, 1);
  x << 0, 1, 2, 3;
  CHECK(knn_indices(x, 0, 2, true) == std::vector<Index>{1, 2});
  CHECK(knn_indices(x, 0, 2, false) == std::vector<Index>{0, 1});
  SUBCASE("ties go to the lower index") {
    Vector q(1);
    q << 1.5;
    CHECK(knn_indices(x, q, 1) == std::vector<Index>{1});
    CHECK(knn_indices(x, 1, 2, true) == std::vector<Index>{0, 2});
  }
  CHECK_THROWS_AS(knn_indices(x, 0, 4, true), Error);
}

TEST_CASE("property: knn matches an exhaustive sort") {
  Rng rng(40);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 6 + static_cast<Index>(uniform_index(rng, 100));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 4));
    const Index k = 1 + static_cast<Index>(uniform_index(rng, 5));
    // Coarse grid so that distance ties actually occur.
    Matrix x = testutil::random_matrix(rng, n, d, -3, 3);
    x = (x.array() * 2.0).round() / 2.0;
    const Index row = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    std::vector<std::pair<double, Index>> all;
    for (Index i = 0; i < n; ++i) {
      if (i != row) all.emplace_back((x.row(i) - x.row(row)).squaredNorm(), i);
    }
    std::sort(all.begin(), all.end());
    std::vector<Index> want;
    for (Index i = 0; i < k; ++i) want.push_back(all[static_cast<std::size_t>(i)].second);
    REQUIRE(knn_indices(x, row, k, true) == want);
  }
}

TEST_CASE("lbfgs on a quadratic bowl") {
  const Objective f = [](const Vector& x, Vector& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  Vector x0(2);
  x0 << 3, 4;
  LbfgsOptions opts;
  opts.max_iter = 30;
  const OptimResult r = lbfgs_minimize(f, x0, opts);
  CHECK(r.x.norm() < 1e-6);
  CHECK(r.iterations <= 30);
}

TEST_CASE("lbfgs on Rosenbrock") {
  const Objective f = [](const Vector& x, Vector& g) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -2.0 * a - 400.0 * x(0) * b;
    g(1) = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  LbfgsOptions opts;
  opts.max_iter = 200;
  const OptimResult r = lbfgs_minimize(f, x0, opts);
  CHECK(r.loss < 1e-4);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-2);
  CHECK(std::abs(r.x(1) - 1.0) < 2e-2);
}

TEST_CASE("lbfgs with zero budget returns x0") {
  const Objective f = [](const Vector& x, Vector& g) {
    g = 2.0 * x;
    return x.squaredNorm();
  };
  Vector x0(2);
  x0 << 1, 2;
  LbfgsOptions opts;
  opts.max_iter = 0;
  const OptimResult r = lbfgs_minimize(f, x0, opts);
  CHECK(r.x == x0);
  CHECK_FALSE(r.converged);
  CHECK(r.loss == doctest::Approx(5.0));
}

TEST_CASE("lbfgs rejects a non-finite start") {
  const Objective f = [](const Vector& x, Vector& g) {
    g = x;
    return std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(lbfgs_minimize(f, Vector::Ones(2)), Error);
}

TEST_CASE("property: lbfgs accepted losses are non-increasing") {
  Rng rng(50);
  for (int rep = 0; rep < 200; ++rep) {
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 6));
    const Matrix a = testutil::random_matrix(rng, d, d);
    const Matrix h = a.transpose() * a + 0.1 * Matrix::Identity(d, d);
    const Vector b = testutil::random_vector(rng, d);
    const double quartic = uniform(rng, 0.0, 1.0);
    // Convex quadratic plus a quartic term to keep the line search honest.
    const Objective f = [&](const Vector& x, Vector& g) {
      const double q = x.squaredNorm();
      g = h * x - b + 4.0 * quartic * q * x;
      return 0.5 * x.dot(h * x) - b.dot(x) + quartic * q * q;
    };
    LbfgsOptions opts;
    opts.max_iter = 25;
    const Vector x0 = testutil::random_vector(rng, d, -4, 4);
    const OptimResult r = lbfgs_minimize(f, x0, opts);
    for (std::size_t i = 1; i < r.loss_history.size(); ++i) REQUIRE(r.loss_history[i] <= r.loss_history[i - 1]);
    Vector g;
    REQUIRE(r.loss <= f(x0, g) + 1e-12);
    REQUIRE(r.loss == doctest::Approx(f(r.x, g)));
  }
}
