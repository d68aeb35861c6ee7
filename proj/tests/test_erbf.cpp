#include "doctest.h"

#include "smoothreg/erbf.hpp"
#include "smoothreg/error.hpp"
#include "smoothreg/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace smoothreg;

namespace {

double median(Vector v) {
  std::sort(v.data(), v.data() + v.size());
  const Index m = v.size() / 2;
  return v.size() % 2 ? v(m) : 0.5 * (v(m - 1) + v(m));
}

Vector theta_of(const Matrix& widths) {
  Vector t(widths.size());
  for (Index c = 0; c < widths.rows(); ++c) {
    for (Index j = 0; j < widths.cols(); ++j) t(c * widths.cols() + j) = std::log(widths(c, j));
  }
  return t;
}

}  // namespace

TEST_CASE("auto_k") {
  CHECK(auto_k(1000, 8) == 40);
  CHECK(auto_k(150, 100) == 15);
  CHECK(auto_k(50000, 5) == 40);
  CHECK(auto_k(100000, 150) == 200);
  CHECK(auto_k(1000, 60) == 100);
}

TEST_CASE("percentile interpolates linearly") {
  Vector v(5);
  v << 5, 1, 4, 2, 3;
  CHECK(percentile(v, 50) == 3.0);
  CHECK(percentile(v, 100) == 5.0);
  CHECK(percentile(v, 90) == doctest::Approx(4.6));
}

TEST_CASE("estimate_lipschitz") {
  SUBCASE("constant target") {
    Rng rng(1);
    const Matrix x = testutil::random_matrix(rng, 30, 2);
    CHECK(estimate_lipschitz(x, Vector::Constant(30, 4.0), 5, 1e-12, 99).isZero());
  }
  SUBCASE("two points") {
    Matrix x(2, 1);
    x << 0, 1;
    Vector y(2);
    y << 0, 3;
    const Vector l = estimate_lipschitz(x, y, 1, 1e-12, 99);
    CHECK(l(0) == doctest::Approx(3.0));
    CHECK(l(1) == doctest::Approx(3.0));
  }
  SUBCASE("steep regions score higher") {
    Rng rng(2);
    const Index n = 1000;
    const Vector x = testutil::random_vector(rng, n, -1.0, 1.5);
    const Vector y = (5.0 * x.array()).sin();
    const Vector l = estimate_lipschitz(Matrix(x), y, 5, 1e-12, 99);
    double steep = 0.0, flat = 0.0;
    int ns = 0, nf = 0;
    const double peak = std::numbers::pi / 10.0;  // 5x = π/2
    for (Index i = 0; i < n; ++i) {
      if (std::abs(x(i)) < 0.1) {
        steep += l(i);
        ++ns;
      } else if (std::abs(x(i) - peak) < 0.1) {
        flat += l(i);
        ++nf;
      }
    }
    REQUIRE(ns > 0);
    REQUIRE(nf > 0);
    CHECK(steep / ns > 2.0 * (flat / nf));
  }
  SUBCASE("too few rows") {
    CHECK_THROWS_AS(estimate_lipschitz(Matrix::Zero(5, 1), Vector::Zero(5), 5, 1e-12, 99), Error);
  }
}

TEST_CASE("property: Lipschitz estimates are finite, non-negative and capped") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 7 + static_cast<Index>(uniform_index(rng, 60));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 3));
    const Matrix x = testutil::random_matrix(rng, n, d);
    const Vector y = testutil::normal_vector(rng, n);
    const Vector raw = estimate_lipschitz(x, y, 5, 1e-12, 100);
    const Vector l = estimate_lipschitz(x, y, 5, 1e-12, 99);
    REQUIRE(l.allFinite());
    REQUIRE(l.minCoeff() >= 0.0);
    const double cap = percentile(raw, 99);
    for (Index i = 0; i < n; ++i) REQUIRE(l(i) == std::min(raw(i), cap));
  }
}

TEST_CASE("equal weights sample uniformly") {
  const Index n = 20, k = 5;
  const int draws = 10000;
  std::vector<int> hits(n, 0);
  for (int s = 0; s < draws; ++s) {
    const auto pick = weighted_sample_without_replacement(Vector::Ones(n), k, static_cast<std::uint64_t>(s));
    std::vector<Index> sorted = pick;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (Index i : pick) ++hits[static_cast<std::size_t>(i)];
  }
  const double p = static_cast<double>(k) / n;
  const double se = std::sqrt(p * (1.0 - p) / draws);
  for (int h : hits) CHECK(std::abs(h / static_cast<double>(draws) - p) <= 3.0 * se);
}

TEST_CASE("a single positive weight is always chosen") {
  Vector w = Vector::Zero(10);
  w(7) = 1.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    CHECK(weighted_sample_without_replacement(w, 1, s) == std::vector<Index>{7});
  }
  // Exhausted positive weights fall back to uniform draws over the rest.
  const auto three = weighted_sample_without_replacement(w, 3, 1);
  CHECK(three[0] == 7);
  CHECK(three.size() == 3);
  CHECK_THROWS_AS(weighted_sample_without_replacement(w, 11, 0), Error);
}

TEST_CASE("kmeans placement puts one centre per blob") {
  Rng rng(4);
  Matrix x(40, 2);
  for (Index i = 0; i < 40; ++i) {
    x(i, 0) = (i < 20 ? -5.0 : 5.0) + 0.1 * standard_normal(rng);
    x(i, 1) = 0.1 * standard_normal(rng);
  }
  ErbfConfig cfg;
  cfg.center_init = CenterInit::kKMeans;
  const Matrix c = place_centers(x, Vector::Zero(40), 2, cfg);
  CHECK(c(0, 0) * c(1, 0) < 0.0);
  CHECK_THROWS_AS(place_centers(x, Vector::Zero(40), 41, cfg), Error);
}

TEST_CASE("property: Lipschitz placement concentrates near a jump") {
  // Sign test over seeds: lipschitz placement vs uniform placement.
  const Index n = 400, k = 20;
  int wins = 0, losses = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(1000 + s);
    const Vector x = testutil::random_vector(rng, n);
    const Vector y = (x.array() > 0.0).cast<double>();
    ErbfConfig cfg;
    cfg.seed = s;
    const Matrix lip = place_centers(Matrix(x), y, k, cfg);
    const auto uni = weighted_sample_without_replacement(Vector::Ones(n), k, s);
    int a = 0, b = 0;
    for (Index c = 0; c < k; ++c) a += std::abs(lip(c, 0)) < 0.1;
    for (Index i : uni) b += std::abs(x(i)) < 0.1;
    wins += a > b;
    losses += a < b;
  }
  // One-sided binomial(½) tail below 0.01 needs wins well above half of the
  // decided pairs: for m pairs, wins ≥ m/2 + 1.17·√m is sufficient.
  const int m = wins + losses;
  CHECK(wins >= m / 2.0 + 1.17 * std::sqrt(static_cast<double>(m)));
}

TEST_CASE("init_widths local variance") {
  Matrix x(12, 4);
  for (Index i = 0; i < 12; ++i) x.row(i).setConstant(i % 2 ? 0.5 : -0.5);
  const Matrix c = Matrix::Zero(1, 4);
  const Matrix w = init_widths(x, Vector::Zero(12), c, WidthInit::kLocalVariance);
  for (Index j = 0; j < 4; ++j) CHECK(w(0, j) == doctest::Approx(1.0));
}

TEST_CASE("init_widths local ridge caps an irrelevant feature") {
  Matrix x(12, 2);
  for (Index i = 0; i < 12; ++i) {
    x(i, 0) = i % 2 ? 1.0 : -1.0;
    x(i, 1) = (i / 2) % 2 ? -1.0 : 1.0;  // orthogonal to column 0 and centred
  }
  const Vector y = 10.0 * x.col(0);
  const Matrix w = init_widths(x, y, Matrix::Zero(1, 2), WidthInit::kLocalRidge);
  CHECK(w(0, 1) == kWidthCap);
  CHECK(w(0, 0) < 10.0);
}

TEST_CASE("init_widths local ridge gives the strong feature narrower widths") {
  Rng rng(5);
  const Matrix x = testutil::random_matrix(rng, 300, 2);
  const Vector y = 10.0 * x.col(0);
  ErbfConfig cfg;
  const Matrix c = place_centers(x, y, 15, cfg);
  const Matrix w = init_widths(x, y, c, WidthInit::kLocalRidge);
  for (Index k = 0; k < 15; ++k) CHECK(w(k, 0) < w(k, 1));
}

TEST_CASE("property: initial widths are positive and finite") {
  Rng rng(6);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 10 + static_cast<Index>(uniform_index(rng, 60));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 4));
    const Index k = 1 + static_cast<Index>(uniform_index(rng, 8));
    Matrix x = testutil::random_matrix(rng, n, d);
    if (rep % 5 == 0) x.col(0).setConstant(1.0);
    const Vector y = testutil::normal_vector(rng, n);
    const Matrix c = testutil::random_matrix(rng, k, d);
    for (WidthInit m : {WidthInit::kLocalRidge, WidthInit::kLocalVariance}) {
      const Matrix w = init_widths(x, y, c, m);
      REQUIRE(w.allFinite());
      REQUIRE(w.minCoeff() > 0.0);
      REQUIRE(w.maxCoeff() <= kWidthCap);
    }
  }
}

TEST_CASE("loss and gradient edge cases") {
  Rng rng(7);
  const Matrix x = testutil::random_matrix(rng, 20, 2);
  const Vector y = testutil::random_vector(rng, 20);
  const Matrix c = testutil::random_matrix(rng, 3, 2);
  const Vector theta = testutil::random_vector(rng, 6);
  Vector g;
  const double loss = erbf_loss_and_grad(theta, x, y, c, Vector::Zero(3), 0.5, g);
  CHECK(g.isZero());
  CHECK(loss == doctest::Approx((y.array() - 0.5).square().mean()));

  // One sample sitting on its centre contributes nothing to the gradient.
  Matrix x1(1, 2);
  x1 << 0.3, -0.2;
  Vector y1(1);
  y1 << 7.0;
  Vector w1(1);
  w1 << 2.0;
  erbf_loss_and_grad(Vector::Zero(2), x1, y1, x1, w1, 0.0, g);
  CHECK(g.isZero());

  Vector bad = theta;
  bad(4) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(erbf_loss_and_grad(bad, x, y, c, Vector::Ones(3), 0.0, g), doctest::Contains("index 4"), Error);
}

TEST_CASE("property: analytic gradient matches central differences") {
  Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    const Index k = 1 + static_cast<Index>(uniform_index(rng, 5));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 3));
    const Index n = 5 + static_cast<Index>(uniform_index(rng, 36));
    const Matrix x = testutil::random_matrix(rng, n, d, -2, 2);
    const Vector y = testutil::normal_vector(rng, n);
    const Matrix c = testutil::random_matrix(rng, k, d, -2, 2);
    const Vector w = testutil::normal_vector(rng, k);
    const Vector theta = testutil::random_vector(rng, k * d, -0.5, 0.8);
    Vector g;
    erbf_loss_and_grad(theta, x, y, c, w, 0.1, g);
    const Vector fd = oracle::central_difference(
        [&](const Vector& t) {
          Vector scratch;
          return erbf_loss_and_grad(t, x, y, c, w, 0.1, scratch);
        },
        theta, 1e-6);
    const double rel = (g - fd).cwiseAbs().maxCoeff() / std::max(1e-6, fd.cwiseAbs().maxCoeff());
    REQUIRE(rel < 1e-5);
  }
}

TEST_CASE("erbf on a constant target") {
  Rng rng(9);
  const Matrix x = testutil::random_matrix(rng, 40, 2);
  ErbfConfig cfg;
  cfg.n_rbf = 6;
  const ErbfModel m = erbf_fit(testutil::make_dataset(x, Vector::Constant(40, 3.0)), cfg);
  CHECK(m.bias == doctest::Approx(3.0));
  CHECK(m.weights.cwiseAbs().maxCoeff() < 1e-8);
  CHECK((erbf_predict(m, x).array() - 3.0).abs().maxCoeff() < 1e-8);
}

TEST_CASE("erbf fits a Gaussian bump") {
  // On [-2, 2]² the ±3σ output window still contains the peak value 1.
  Matrix grid(400, 2);
  Vector y(400);
  for (Index i = 0; i < 20; ++i) {
    for (Index j = 0; j < 20; ++j) {
      const Index r = i * 20 + j;
      grid(r, 0) = -2.0 + 4.0 * static_cast<double>(i) / 19.0;
      grid(r, 1) = -2.0 + 4.0 * static_cast<double>(j) / 19.0;
      y(r) = std::exp(-0.5 * grid.row(r).squaredNorm());
    }
  }
  const Dataset ds = testutil::make_dataset(grid, y);
  Rng rng(10);
  const Matrix q = testutil::random_matrix(rng, 500, 2, -2, 2);
  Vector yq(500);
  for (Index i = 0; i < 500; ++i) yq(i) = std::exp(-0.5 * q.row(i).squaredNorm());

  ErbfConfig cfg;
  cfg.n_rbf = 10;
  cfg.alpha = 1e-6;
  ErbfFitReport report;
  const ErbfModel m = erbf_fit(ds, cfg, &report);
  CHECK(r2(yq, erbf_predict(m, q)) >= 0.99);
  CHECK(report.mse_after_optim <= report.mse_before_optim + 1e-12);

  // k-means puts a centre on the peak, which the training-row bound needs.
  cfg.center_init = CenterInit::kKMeans;
  const ErbfModel km = erbf_fit(ds, cfg);
  CHECK((erbf_predict(km, grid) - y).cwiseAbs().maxCoeff() < 0.01);
  CHECK(r2(yq, erbf_predict(km, q)) >= 0.99);
}

TEST_CASE("erbf prediction at a centre and far away") {
  Rng rng(11);
  const Matrix x = testutil::random_matrix(rng, 200, 1, -10, 10);
  const Vector y = (x.array() / 3.0).sin();
  ErbfConfig cfg;
  cfg.n_rbf = 8;
  cfg.alpha = 1e-3;
  ErbfModel m = erbf_fit(testutil::make_dataset(x, y), cfg);
  // Narrow every width so the basis functions stop overlapping.
  m.widths.setConstant(1e-7);
  m.y_stats.std = 1e6;
  const Matrix c_raw = (m.centers.array() * m.feature_scaler.stds()(0) + m.feature_scaler.means()(0)).matrix();
  const Vector at = erbf_predict(m, c_raw);
  for (Index k = 0; k < m.n_centers(); ++k) CHECK(at(k) == doctest::Approx(m.weights(k) + m.bias));
  const Vector far = erbf_predict(m, Matrix::Constant(1, 1, 1e4));
  CHECK(far(0) == doctest::Approx(m.bias));
  CHECK_THROWS_AS(erbf_predict(m, Matrix::Zero(1, 2)), Error);
}

TEST_CASE("erbf input errors") {
  Rng rng(12);
  const Dataset small = testutil::make_dataset(testutil::random_matrix(rng, 10, 2), testutil::random_vector(rng, 10));
  CHECK_THROWS_AS(erbf_fit(small, {}), Error);
  const Dataset ok = testutil::make_dataset(testutil::random_matrix(rng, 30, 2), testutil::random_vector(rng, 30));
  ErbfConfig cfg;
  cfg.n_rbf = 31;
  CHECK_THROWS_AS(erbf_fit(ok, cfg), Error);
  cfg.n_rbf = 5;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(erbf_fit(ok, cfg), Error);
}

TEST_CASE("property: erbf fit invariants") {
  Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 20 + static_cast<Index>(uniform_index(rng, 40));
    const Index d = 1 + static_cast<Index>(uniform_index(rng, 3));
    const Matrix x = testutil::random_matrix(rng, n, d, -2, 2);
    const Vector y = x.col(0).array().sin().matrix() + 0.1 * testutil::normal_vector(rng, n);
    ErbfConfig cfg;
    cfg.n_rbf = 1 + static_cast<Index>(uniform_index(rng, 10));
    cfg.alpha = std::exp(uniform(rng, std::log(1e-3), std::log(1e3)));
    cfg.center_init = rep % 2 ? CenterInit::kKMeans : CenterInit::kLipschitz;
    cfg.width_init = rep % 3 ? WidthInit::kLocalRidge : WidthInit::kLocalVariance;
    cfg.resolve_weights_in_loop = rep % 4 != 0;
    cfg.seed = rng();
    ErbfFitReport report;
    const ErbfModel m = erbf_fit(testutil::make_dataset(x, y), cfg, &report);
    REQUIRE(m.widths.minCoeff() > 0.0);
    REQUIRE(m.widths.allFinite());
    REQUIRE(m.weights.allFinite());
    REQUIRE(report.mse_after_optim <= report.mse_before_optim + 1e-12);
    for (std::size_t i = 1; i < report.optim.loss_history.size(); ++i) {
      REQUIRE(report.optim.loss_history[i] <= report.optim.loss_history[i - 1]);
    }
    const Vector p = erbf_predict(m, testutil::random_matrix(rng, 20, d, -30, 30));
    REQUIRE(p.maxCoeff() <= m.y_stats.mean + 3.0 * m.y_stats.std);
    REQUIRE(p.minCoeff() >= m.y_stats.mean - 3.0 * m.y_stats.std);
    // Deterministic per seed.
    REQUIRE(erbf_fit(testutil::make_dataset(x, y), cfg).widths == m.widths);
  }
}

TEST_CASE("width optimisation widens an irrelevant feature") {
  Rng rng(14);
  const Matrix x = testutil::random_matrix(rng, 400, 2);
  const Vector y = (3.0 * x.col(0).array()).sin().matrix() + 0.05 * testutil::normal_vector(rng, 400);
  ErbfConfig cfg;
  cfg.n_rbf = 20;
  cfg.alpha = 1e-3;
  const ErbfModel m = erbf_fit(testutil::make_dataset(x, y), cfg);
  CHECK(median(m.widths.col(1)) > median(m.widths.col(0)));
}

TEST_CASE("log-width packing is row-major by centre") {
  Matrix w(2, 3);
  w << 1, 2, 3, 4, 5, 6;
  const Vector t = theta_of(w);
  CHECK(std::exp(t(4)) == doctest::Approx(5.0));
}
