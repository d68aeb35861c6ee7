#pragma once

#include "smoothreg/dataset.hpp"
#include "smoothreg/model.hpp"
#include "smoothreg/search.hpp"
#include "smoothreg/stats.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smoothreg {

struct NestedCvConfig {
  int outer_k = 5;
  std::uint64_t outer_seed = 42;
  std::uint64_t search_seed = 0;
  /// Overrides the search space's own trial budget.
  std::optional<int> trial_budget;
  int parallel_folds = 1;
};

struct FoldResult {
  std::string dataset;
  std::string model;
  int fold = 0;
  Index n_train = 0;
  Index n_test = 0;
  Index n_features = 0;
  double train_r2 = 0.0;
  double test_r2 = 0.0;
  double test_r2_adj = 0.0;
  double gap = 0.0;  // train_r2 − test_r2
  double tune_seconds = 0.0;
  double train_seconds = 0.0;
  double predict_ms_per_1k = 0.0;
  TrialParams best_params;
  bool failed = false;
  std::string error;
};

/// Fold-level preprocessing: median imputation fitted on `train`, plus
/// standardization for the ridge baseline. Returns (train, test).
std::pair<Dataset, Dataset> prepare_fold(const Dataset& train, const Dataset& test, ModelKind kind);

/// Mean inner-CV R² of one configuration, with harness clipping applied.
double inner_cv_score(ModelKind kind, const TrialParams& params, const Dataset& train, int folds,
                      std::uint64_t seed);

/// Outer k-fold loop with an inner random search per fold, refit on the full
/// outer training split, and clipped evaluation on the held-out fold.
std::vector<FoldResult> nested_cv_run(const Dataset& dataset, const std::string& dataset_name,
                                      ModelKind kind, const SearchSpace& space,
                                      const NestedCvConfig& config);

struct CellAggregate {
  int folds = 0;
  int failed_folds = 0;
  double mean_r2_adj = 0.0;
  double std_r2_adj = 0.0;
  double median_r2_adj = 0.0;
  double mean_gap = 0.0;
  double median_gap = 0.0;
  double mean_train_r2 = 0.0;
  double mean_test_r2 = 0.0;
  double mean_tune_seconds = 0.0;
  double mean_train_seconds = 0.0;
  double mean_predict_ms_per_1k = 0.0;

  /// Any failed fold fails the whole cell for ranking.
  bool failed() const { return failed_folds > 0 || folds == 0; }
};

struct BenchmarkReport {
  ScoreTable scores;  // NaN where a cell failed
  std::vector<std::vector<CellAggregate>> cells;  // [dataset][model]
  RankTable ranks;
  std::optional<FriedmanResult> friedman;
  std::optional<double> nemenyi_cd;
  std::vector<GapWinRow> gap_wins;
};

/// Smooth-vs-tree pairs used for the matched-accuracy gap analysis when none
/// are given explicitly.
std::vector<std::pair<std::string, std::string>> default_gap_pairs(const std::vector<std::string>& models);

/// Aggregates fold records (datasets and models in order of first
/// appearance). `models` optionally restricts and orders the models.
BenchmarkReport build_report(const std::vector<FoldResult>& results,
                             const std::vector<std::string>& models = {},
                             std::vector<std::pair<std::string, std::string>> gap_pairs = {});

nlohmann::json report_to_json(const BenchmarkReport& report);

/// Models ordered by mean rank (ties by name order of appearance).
std::vector<std::size_t> models_by_mean_rank(const BenchmarkReport& report);

void write_rank_csv(const std::filesystem::path& path, const BenchmarkReport& report);
void write_r2_csv(const std::filesystem::path& path, const BenchmarkReport& report);

inline constexpr const char* kFoldResultSchema = "smoothreg.fold_result/1";

nlohmann::json fold_result_to_json(const FoldResult& r);
FoldResult fold_result_from_json(const nlohmann::json& j);

void write_results_jsonl(const std::filesystem::path& path, const std::vector<FoldResult>& results);
std::vector<FoldResult> read_results_jsonl(const std::filesystem::path& path);

}  // namespace smoothreg
