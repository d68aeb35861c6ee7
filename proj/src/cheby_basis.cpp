#include "smoothreg/cheby_basis.hpp"

#include "smoothreg/error.hpp"

#include <algorithm>
#include <numeric>

namespace smoothreg {

double cheb_eval(int degree, double x) {
  if (degree < 0) throw Error("cheb_eval: negative degree");
  if (degree == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < degree; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<Index> interaction_features(const Matrix& x_scaled, const ChebyBasisConfig& cfg) {
  const Index d = x_scaled.cols();
  std::vector<Index> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), Index{0});
  if (!cfg.include_interactions || d <= cfg.high_dim_threshold) return all;

  Vector var(d);
  for (Index j = 0; j < d; ++j) {
    var(j) = (x_scaled.col(j).array() - x_scaled.col(j).mean()).square().mean();
  }
  std::stable_sort(all.begin(), all.end(), [&](Index a, Index b) { return var(a) > var(b); });
  all.resize(static_cast<std::size_t>((d + 1) / 2));
  std::sort(all.begin(), all.end());
  return all;
}

DesignMatrix build_design_matrix(const Matrix& x_scaled, const ChebyBasisConfig& cfg,
                                 const std::vector<Index>& eligible) {
  const Index n = x_scaled.rows();
  const Index d = x_scaled.cols();
  const int c = cfg.complexity;
  if (c < 1) throw Error("build_design_matrix: complexity must be >= 1");
  if (n < 1 || d < 1) throw Error("build_design_matrix: empty input");
  if (cfg.max_interaction_complexity != 1 && cfg.max_interaction_complexity != 2) {
    throw Error("build_design_matrix: max_interaction_complexity must be 1 or 2");
  }

  const auto m = static_cast<Index>(eligible.size());
  const Index pairs = cfg.include_interactions ? m * (m - 1) / 2 : 0;
  const Index per_pair = cfg.max_interaction_complexity;
  const Index p = 1 + d * c + pairs * per_pair;

  DesignMatrix dm;
  dm.values.resize(n, p);
  dm.columns.reserve(static_cast<std::size_t>(p));

  dm.values.col(0).setOnes();
  dm.columns.push_back({BasisColumn::Kind::kConstant, 0, -1, 0});
  Index col = 1;
  for (Index j = 0; j < d; ++j) {
    dm.values.col(col) = x_scaled.col(j);
    dm.columns.push_back({BasisColumn::Kind::kUnivariate, j, -1, 1});
    ++col;
    for (int k = 2; k <= c; ++k, ++col) {
      const auto tk1 = dm.values.col(col - 1).array();
      if (k == 2) {
        dm.values.col(col) = 2.0 * x_scaled.col(j).array() * tk1 - 1.0;
      } else {
        dm.values.col(col) = 2.0 * x_scaled.col(j).array() * tk1 - dm.values.col(col - 2).array();
      }
      dm.columns.push_back({BasisColumn::Kind::kUnivariate, j, -1, k});
    }
  }

  if (cfg.include_interactions) {
    for (Index a = 0; a < m; ++a) {
      for (Index b = a + 1; b < m; ++b) {
        const Index i = eligible[static_cast<std::size_t>(a)];
        const Index j = eligible[static_cast<std::size_t>(b)];
        if (i < 0 || i >= d || j < 0 || j >= d) throw Error("build_design_matrix: bad interaction index");
        dm.values.col(col) = x_scaled.col(i).cwiseProduct(x_scaled.col(j));
        dm.columns.push_back({BasisColumn::Kind::kProduct, i, j, 1});
        ++col;
        if (per_pair == 2) {
          dm.values.col(col) = 2.0 * dm.values.col(col - 1).array().square() - 1.0;
          dm.columns.push_back({BasisColumn::Kind::kProductT2, i, j, 2});
          ++col;
        }
      }
    }
  }
  return dm;
}

DesignMatrix build_design_matrix(const Matrix& x_scaled, const ChebyBasisConfig& cfg) {
  return build_design_matrix(x_scaled, cfg, interaction_features(x_scaled, cfg));
}

}  // namespace smoothreg
