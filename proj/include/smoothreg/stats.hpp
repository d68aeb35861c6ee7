#pragma once

#include "smoothreg/dataset.hpp"

#include <string>
#include <utility>
#include <vector>

namespace smoothreg {

/// Per-dataset ranks (rows) of each model (columns); 1 is best.
struct RankTable {
  Matrix ranks;
  Vector mean_ranks;
  std::vector<int> rank1_counts;
  std::vector<int> rank2_counts;
};

/// Ranks each row of `scores` (higher is better), averaging ties. NaN marks a
/// failed run, which receives the worst rank k.
RankTable rank_models(const Matrix& scores);

struct FriedmanResult {
  double statistic = 0.0;
  int df = 0;
  double critical_value = 0.0;
  bool significant = false;
};

/// Friedman χ² on an n×k rank matrix, judged at α = 0.05.
FriedmanResult friedman_test(const Matrix& ranks);

/// χ² upper 5% point for 1 ≤ df ≤ 10.
double chi2_critical_05(int df);

/// Studentized-range based q_α for the Nemenyi test, 2 ≤ k ≤ 10, α = 0.05.
double nemenyi_q(int k, double alpha = 0.05);

double nemenyi_cd(int k, Index n, double alpha = 0.05);

/// Mean test R̄² and mean generalisation gap per (dataset, model); NaN for
/// failed runs.
struct ScoreTable {
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  Matrix r2_adj;
  Matrix gap;

  Index model_index(const std::string& name) const;
};

struct GapWinRow {
  std::string smooth_model;
  std::string tree_model;
  int matched = 0;
  int smooth_wins = 0;
  int tree_wins = 0;
  int ties = 0;
  /// (smooth_wins + ties/2) / matched; NaN when nothing matched.
  double smooth_fraction = 0.0;
  std::vector<std::string> matched_datasets;
};

inline constexpr double kMatchedAccuracyThreshold = 0.02;

/// For each pair, compares gaps on datasets where the two models' R̄² differ
/// by at most `threshold`.
std::vector<GapWinRow> matched_accuracy_gap_wins(
    const ScoreTable& table, const std::vector<std::pair<std::string, std::string>>& pairs,
    double threshold = kMatchedAccuracyThreshold);

}  // namespace smoothreg
