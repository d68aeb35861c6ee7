#include "smoothreg/harness.hpp"

#include "smoothreg/error.hpp"
#include "smoothreg/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <thread>

namespace smoothreg {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Independent, reproducible seeds per (base, stream) pair.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double median_of(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double num_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNaN;
  return j.at(key).get<double>();
}

}  // namespace

std::pair<Dataset, Dataset> prepare_fold(const Dataset& train, const Dataset& test, ModelKind kind) {
  Dataset tr = impute_median(train, train);
  Dataset te = impute_median(train, test);
  if (kind == ModelKind::kRidge) {
    const auto scaler = Standardizer::fit(tr.features);
    tr.features = scaler.apply(tr.features);
    te.features = scaler.apply(te.features);
  }
  return {std::move(tr), std::move(te)};
}

double inner_cv_score(ModelKind kind, const TrialParams& params, const Dataset& train, int folds,
                      std::uint64_t seed) {
  const FoldPlan plan = kfold_split(train.n(), folds, seed);
  double total = 0.0;
  for (int f = 0; f < folds; ++f) {
    const auto tr_idx = plan.train_indices(f);
    const auto te_idx = plan.test_indices(f);
    auto [tr, te] = prepare_fold(train.subset(tr_idx), train.subset(te_idx), kind);
    const FittedModel m = fit_model(kind, params, tr);
    const Vector preds = clip_predictions(predict(m, te.features), tr.target);
    total += r2(te.target, preds);
  }
  return total / static_cast<double>(folds);
}

std::vector<FoldResult> nested_cv_run(const Dataset& dataset, const std::string& dataset_name,
                                      ModelKind kind, const SearchSpace& space,
                                      const NestedCvConfig& config) {
  dataset.validate();
  const FoldPlan outer = kfold_split(dataset.n(), config.outer_k, config.outer_seed);
  const int budget = config.trial_budget.value_or(space.trial_budget);
  std::vector<FoldResult> results(static_cast<std::size_t>(config.outer_k));

  auto run_fold = [&](int fold) {
    FoldResult r;
    r.dataset = dataset_name;
    r.model = std::string(model_name(kind));
    r.fold = fold;
    r.n_features = dataset.d();
    try {
      const auto tr_idx = outer.train_indices(fold);
      const auto te_idx = outer.test_indices(fold);
      r.n_train = static_cast<Index>(tr_idx.size());
      r.n_test = static_cast<Index>(te_idx.size());
      const Dataset raw_train = dataset.subset(tr_idx);
      auto [train, test] = prepare_fold(raw_train, dataset.subset(te_idx), kind);

      auto t0 = Clock::now();
      const int inner_k = inner_fold_count(train.n());
      const std::uint64_t inner_seed = derive_seed(config.outer_seed, static_cast<std::uint64_t>(fold));
      // The inner loop gets the raw (un-imputed) split so its own folds
      // impute from their own training rows.
      const SearchResult search = random_search(
          space, [&](const TrialParams& p) { return inner_cv_score(kind, p, raw_train, inner_k, inner_seed); },
          budget, config.search_seed);
      r.tune_seconds = seconds_since(t0);
      r.best_params = search.best;

      t0 = Clock::now();
      const FittedModel model = fit_model(kind, search.best, train);
      r.train_seconds = seconds_since(t0);

      const Vector train_pred = clip_predictions(predict(model, train.features), train.target);
      t0 = Clock::now();
      const Vector test_pred = clip_predictions(predict(model, test.features), train.target);
      r.predict_ms_per_1k = seconds_since(t0) * 1e3 * 1000.0 / static_cast<double>(std::max<Index>(r.n_test, 1));

      r.train_r2 = smoothreg::r2(train.target, train_pred);
      r.test_r2 = smoothreg::r2(test.target, test_pred);
      r.test_r2_adj = adjusted_r2(r.test_r2, r.n_test, r.n_features);
      r.gap = r.train_r2 - r.test_r2;
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
      r.train_r2 = r.test_r2 = r.test_r2_adj = r.gap = kNaN;
    }
    results[static_cast<std::size_t>(fold)] = std::move(r);
  };

  const int workers = std::clamp(config.parallel_folds, 1, config.outer_k);
  if (workers == 1) {
    for (int f = 0; f < config.outer_k; ++f) run_fold(f);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int f = next++; f < config.outer_k; f = next++) run_fold(f);
      });
    }
    for (auto& t : pool) t.join();
  }
  return results;
}

std::vector<std::pair<std::string, std::string>> default_gap_pairs(const std::vector<std::string>& models) {
  std::vector<std::pair<std::string, std::string>> pairs;
  auto has = [&](const std::string& m) { return std::find(models.begin(), models.end(), m) != models.end(); };
  for (const char* smooth : {"chebypoly", "erbf", "chebytree"}) {
    if (has(smooth) && has("dt")) pairs.emplace_back(smooth, "dt");
  }
  return pairs;
}

BenchmarkReport build_report(const std::vector<FoldResult>& results, const std::vector<std::string>& models,
                             std::vector<std::pair<std::string, std::string>> gap_pairs) {
  if (results.empty()) throw Error("build_report: no fold results");
  BenchmarkReport rep;
  auto& st = rep.scores;
  for (const auto& r : results) {
    if (std::find(st.datasets.begin(), st.datasets.end(), r.dataset) == st.datasets.end()) {
      st.datasets.push_back(r.dataset);
    }
    if (models.empty() && std::find(st.models.begin(), st.models.end(), r.model) == st.models.end()) {
      st.models.push_back(r.model);
    }
  }
  if (!models.empty()) st.models = models;

  const auto nd = st.datasets.size();
  const auto nm = st.models.size();
  if (nm < 1) throw Error("build_report: no models selected");
  std::vector<std::vector<std::vector<const FoldResult*>>> grouped(nd, std::vector<std::vector<const FoldResult*>>(nm));
  for (const auto& r : results) {
    const auto di = static_cast<std::size_t>(std::find(st.datasets.begin(), st.datasets.end(), r.dataset) - st.datasets.begin());
    const auto mit = std::find(st.models.begin(), st.models.end(), r.model);
    if (mit == st.models.end()) continue;
    grouped[di][static_cast<std::size_t>(mit - st.models.begin())].push_back(&r);
  }

  st.r2_adj = Matrix::Constant(static_cast<Index>(nd), static_cast<Index>(nm), kNaN);
  st.gap = st.r2_adj;
  rep.cells.assign(nd, std::vector<CellAggregate>(nm));
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < nm; ++j) {
      auto& c = rep.cells[i][j];
      std::vector<double> r2a, gaps;
      double train_r2 = 0, test_r2 = 0, tune = 0, train_s = 0, pred = 0;
      for (const FoldResult* f : grouped[i][j]) {
        ++c.folds;
        if (f->failed) {
          ++c.failed_folds;
          continue;
        }
        r2a.push_back(f->test_r2_adj);
        gaps.push_back(f->gap);
        train_r2 += f->train_r2;
        test_r2 += f->test_r2;
        tune += f->tune_seconds;
        train_s += f->train_seconds;
        pred += f->predict_ms_per_1k;
      }
      const double ok = static_cast<double>(r2a.size());
      if (r2a.empty()) {
        c.mean_r2_adj = c.std_r2_adj = c.median_r2_adj = c.mean_gap = c.median_gap = kNaN;
        c.mean_train_r2 = c.mean_test_r2 = c.mean_tune_seconds = c.mean_train_seconds = c.mean_predict_ms_per_1k = kNaN;
      } else {
        c.mean_r2_adj = std::accumulate(r2a.begin(), r2a.end(), 0.0) / ok;
        double ss = 0.0;
        for (double v : r2a) ss += (v - c.mean_r2_adj) * (v - c.mean_r2_adj);
        c.std_r2_adj = r2a.size() > 1 ? std::sqrt(ss / (ok - 1.0)) : 0.0;
        c.median_r2_adj = median_of(r2a);
        c.mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / ok;
        c.median_gap = median_of(gaps);
        c.mean_train_r2 = train_r2 / ok;
        c.mean_test_r2 = test_r2 / ok;
        c.mean_tune_seconds = tune / ok;
        c.mean_train_seconds = train_s / ok;
        c.mean_predict_ms_per_1k = pred / ok;
      }
      if (!c.failed()) {
        st.r2_adj(static_cast<Index>(i), static_cast<Index>(j)) = c.mean_r2_adj;
        st.gap(static_cast<Index>(i), static_cast<Index>(j)) = c.mean_gap;
      }
    }
  }

  if (nm >= 2) {
    rep.ranks = rank_models(st.r2_adj);
    const int k = static_cast<int>(nm);
    if (nd >= 2 && k <= 11) rep.friedman = friedman_test(rep.ranks.ranks);
    if (k <= 10) rep.nemenyi_cd = nemenyi_cd(k, static_cast<Index>(nd));
    if (nd >= 3) {
      if (gap_pairs.empty()) gap_pairs = default_gap_pairs(st.models);
      rep.gap_wins = matched_accuracy_gap_wins(st, gap_pairs);
    }
  } else {
    rep.ranks.ranks = Matrix::Ones(static_cast<Index>(nd), 1);
    rep.ranks.mean_ranks = Vector::Ones(1);
    rep.ranks.rank1_counts = {static_cast<int>(nd)};
    rep.ranks.rank2_counts = {0};
  }
  return rep;
}

std::vector<std::size_t> models_by_mean_rank(const BenchmarkReport& report) {
  std::vector<std::size_t> order(report.scores.models.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return report.ranks.mean_ranks(static_cast<Index>(a)) < report.ranks.mean_ranks(static_cast<Index>(b));
  });
  return order;
}

json report_to_json(const BenchmarkReport& rep) {
  const auto& st = rep.scores;
  json j;
  j["schema"] = "smoothreg.report/1";
  j["datasets"] = st.datasets;
  j["models"] = st.models;

  json cells = json::array();
  for (std::size_t i = 0; i < st.datasets.size(); ++i) {
    for (std::size_t m = 0; m < st.models.size(); ++m) {
      const auto& c = rep.cells[i][m];
      cells.push_back({{"dataset", st.datasets[i]},
                       {"model", st.models[m]},
                       {"folds", c.folds},
                       {"failed_folds", c.failed_folds},
                       {"failed", c.failed()},
                       {"mean_r2_adj", num(c.mean_r2_adj)},
                       {"std_r2_adj", num(c.std_r2_adj)},
                       {"median_r2_adj", num(c.median_r2_adj)},
                       {"mean_gap", num(c.mean_gap)},
                       {"median_gap", num(c.median_gap)},
                       {"mean_train_r2", num(c.mean_train_r2)},
                       {"mean_test_r2", num(c.mean_test_r2)},
                       {"mean_tune_seconds", num(c.mean_tune_seconds)},
                       {"mean_train_seconds", num(c.mean_train_seconds)},
                       {"mean_predict_ms_per_1k", num(c.mean_predict_ms_per_1k)}});
    }
  }
  j["cells"] = std::move(cells);

  json ranks = json::array();
  for (Index i = 0; i < rep.ranks.ranks.rows(); ++i) {
    std::vector<double> row;
    for (Index m = 0; m < rep.ranks.ranks.cols(); ++m) row.push_back(rep.ranks.ranks(i, m));
    ranks.push_back(row);
  }
  j["rank_matrix"] = std::move(ranks);
  json agg = json::array();
  for (std::size_t m = 0; m < st.models.size(); ++m) {
    agg.push_back({{"model", st.models[m]},
                   {"mean_rank", rep.ranks.mean_ranks(static_cast<Index>(m))},
                   {"rank1", rep.ranks.rank1_counts[m]},
                   {"rank2", rep.ranks.rank2_counts[m]}});
  }
  j["rank_aggregates"] = std::move(agg);
  if (rep.friedman) {
    j["friedman"] = {{"statistic", rep.friedman->statistic},
                     {"df", rep.friedman->df},
                     {"critical_value_05", rep.friedman->critical_value},
                     {"significant", rep.friedman->significant}};
  } else {
    j["friedman"] = nullptr;
  }
  j["nemenyi_cd"] = rep.nemenyi_cd ? json(*rep.nemenyi_cd) : json(nullptr);
  json wins = json::array();
  for (const auto& w : rep.gap_wins) {
    wins.push_back({{"smooth_model", w.smooth_model},
                    {"tree_model", w.tree_model},
                    {"threshold", kMatchedAccuracyThreshold},
                    {"matched", w.matched},
                    {"smooth_wins", w.smooth_wins},
                    {"tree_wins", w.tree_wins},
                    {"ties", w.ties},
                    {"smooth_fraction", num(w.smooth_fraction)},
                    {"matched_datasets", w.matched_datasets}});
  }
  j["matched_accuracy_gap_wins"] = std::move(wins);
  return j;
}

namespace {

void write_table_csv(const std::filesystem::path& path, const BenchmarkReport& rep, const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  const auto order = models_by_mean_rank(rep);
  out << "dataset";
  for (auto m : order) out << ',' << rep.scores.models[m];
  out << '\n';
  for (std::size_t i = 0; i < rep.scores.datasets.size(); ++i) {
    out << rep.scores.datasets[i];
    for (auto m : order) {
      const double v = values(static_cast<Index>(i), static_cast<Index>(m));
      out << ',';
      if (std::isfinite(v)) out << v;
    }
    out << '\n';
  }
}

}  // namespace

void write_rank_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  write_table_csv(path, report, report.ranks.ranks);
}

void write_r2_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  write_table_csv(path, report, report.scores.r2_adj);
}

json fold_result_to_json(const FoldResult& r) {
  return {{"schema", kFoldResultSchema},
          {"dataset", r.dataset},
          {"model", r.model},
          {"fold", r.fold},
          {"n_train", r.n_train},
          {"n_test", r.n_test},
          {"n_features", r.n_features},
          {"train_r2", num(r.train_r2)},
          {"test_r2", num(r.test_r2)},
          {"test_r2_adj", num(r.test_r2_adj)},
          {"gap", num(r.gap)},
          {"tune_seconds", r.tune_seconds},
          {"train_seconds", r.train_seconds},
          {"predict_ms_per_1k", r.predict_ms_per_1k},
          {"best_params", params_to_json(r.best_params)},
          {"failed", r.failed},
          {"error", r.error}};
}

FoldResult fold_result_from_json(const json& j) {
  try {
    if (j.value("schema", "") != kFoldResultSchema) throw Error("fold result: unexpected schema");
    FoldResult r;
    r.dataset = j.at("dataset").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.fold = j.at("fold").get<int>();
    r.n_train = j.value("n_train", Index{0});
    r.n_test = j.value("n_test", Index{0});
    r.n_features = j.value("n_features", Index{0});
    r.train_r2 = num_or_nan(j, "train_r2");
    r.test_r2 = num_or_nan(j, "test_r2");
    r.test_r2_adj = num_or_nan(j, "test_r2_adj");
    r.gap = num_or_nan(j, "gap");
    r.tune_seconds = j.value("tune_seconds", 0.0);
    r.train_seconds = j.value("train_seconds", 0.0);
    r.predict_ms_per_1k = j.value("predict_ms_per_1k", 0.0);
    r.best_params = params_from_json(j.value("best_params", json::object()));
    r.failed = j.value("failed", false);
    r.error = j.value("error", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("fold result: ") + e.what());
  }
}

void write_results_jsonl(const std::filesystem::path& path, const std::vector<FoldResult>& results) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& r : results) out << fold_result_to_json(r).dump() << '\n';
}

std::vector<FoldResult> read_results_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::vector<FoldResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(fold_result_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error("results line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace smoothreg
