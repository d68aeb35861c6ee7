#include "smoothreg/stats.hpp"

#include "smoothreg/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace smoothreg {

RankTable rank_models(const Matrix& scores) {
  const Index n = scores.rows();
  const Index k = scores.cols();
  if (k < 2) throw Error("rank_models: need at least two models");
  if (n < 1) throw Error("rank_models: need at least one dataset");

  RankTable t;
  t.ranks.resize(n, k);
  t.rank1_counts.assign(static_cast<std::size_t>(k), 0);
  t.rank2_counts.assign(static_cast<std::size_t>(k), 0);
  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < k; ++j) {
      if (std::isnan(scores(i, j))) {
        t.ranks(i, j) = static_cast<double>(k);
      } else {
        order.push_back(j);
      }
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return scores(i, a) > scores(i, b); });
    for (std::size_t pos = 0; pos < order.size();) {
      std::size_t end = pos + 1;
      while (end < order.size() && scores(i, order[end]) == scores(i, order[pos])) ++end;
      // Positions pos..end-1 share the average of ranks pos+1..end.
      const double avg = 0.5 * static_cast<double>(pos + 1 + end);
      for (std::size_t q = pos; q < end; ++q) t.ranks(i, order[q]) = avg;
      pos = end;
    }
    for (Index j = 0; j < k; ++j) {
      const double r = t.ranks(i, j);
      if (r == 1.0) {
        ++t.rank1_counts[static_cast<std::size_t>(j)];
      } else if (r <= 2.0) {
        ++t.rank2_counts[static_cast<std::size_t>(j)];
      }
    }
  }
  t.mean_ranks = t.ranks.colwise().mean().transpose();
  return t;
}

double chi2_critical_05(int df) {
  static constexpr std::array<double, 10> kTable{3.841, 5.991, 7.815, 9.488, 11.070,
                                                 12.592, 14.067, 15.507, 16.919, 18.307};
  if (df < 1 || df > 10) throw Error("chi2_critical_05: df must lie in [1, 10]");
  return kTable[static_cast<std::size_t>(df - 1)];
}

FriedmanResult friedman_test(const Matrix& ranks) {
  const Index n = ranks.rows();
  const Index k = ranks.cols();
  if (n < 2 || k < 2) throw Error("friedman_test: need at least two datasets and two models");
  FriedmanResult r;
  r.df = static_cast<int>(k - 1);
  r.critical_value = chi2_critical_05(r.df);
  const Vector mean = ranks.colwise().mean().transpose();
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  const double stat = 12.0 * nd / (kd * (kd + 1.0)) * (mean.squaredNorm() - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
  // Rounding can leave a tiny negative value for all-tied tables.
  r.statistic = std::abs(stat) < 1e-12 ? 0.0 : stat;
  r.significant = r.statistic > r.critical_value;
  return r;
}

double nemenyi_q(int k, double alpha) {
  static constexpr std::array<double, 9> kQ05{1.960, 2.343, 2.569, 2.728, 2.850,
                                              2.949, 3.031, 3.102, 3.164};
  if (alpha != 0.05) throw Error("nemenyi: only alpha = 0.05 is supported");
  if (k < 2 || k > 10) throw Error("nemenyi: k must lie in [2, 10]");
  return kQ05[static_cast<std::size_t>(k - 2)];
}

double nemenyi_cd(int k, Index n, double alpha) {
  if (n < 1) throw Error("nemenyi_cd: need at least one dataset");
  const double kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

Index ScoreTable::model_index(const std::string& name) const {
  auto it = std::find(models.begin(), models.end(), name);
  if (it == models.end()) throw Error("score table: unknown model '" + name + "'");
  return static_cast<Index>(it - models.begin());
}

std::vector<GapWinRow> matched_accuracy_gap_wins(
    const ScoreTable& table, const std::vector<std::pair<std::string, std::string>>& pairs,
    double threshold) {
  // Slack for decimal thresholds such as 0.9 − 0.88 landing a hair above 0.02.
  constexpr double kSlack = 1e-12;
  std::vector<GapWinRow> out;
  for (const auto& [smooth, tree] : pairs) {
    const Index a = table.model_index(smooth);
    const Index b = table.model_index(tree);
    GapWinRow row;
    row.smooth_model = smooth;
    row.tree_model = tree;
    for (Index i = 0; i < table.r2_adj.rows(); ++i) {
      const double ra = table.r2_adj(i, a), rb = table.r2_adj(i, b);
      const double ga = table.gap(i, a), gb = table.gap(i, b);
      if (std::isnan(ra) || std::isnan(rb) || std::isnan(ga) || std::isnan(gb)) continue;
      if (std::abs(ra - rb) > threshold + kSlack) continue;
      ++row.matched;
      row.matched_datasets.push_back(table.datasets[static_cast<std::size_t>(i)]);
      if (ga < gb) {
        ++row.smooth_wins;
      } else if (gb < ga) {
        ++row.tree_wins;
      } else {
        ++row.ties;
      }
    }
    row.smooth_fraction = row.matched > 0
                              ? (row.smooth_wins + 0.5 * row.ties) / static_cast<double>(row.matched)
                              : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace smoothreg
