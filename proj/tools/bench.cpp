// Command-line front end: fit/predict single models, generate synthetic data,
// run nested-CV benchmarks and rebuild reports from raw fold results.

#include "smoothreg/dataset.hpp"
#include "smoothreg/error.hpp"
#include "smoothreg/harness.hpp"
#include "smoothreg/metrics.hpp"
#include "smoothreg/model.hpp"
#include "smoothreg/search.hpp"
#include "smoothreg/synthdata.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smoothreg;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr const char* kModelFileFormat = "smoothreg.cli_model";

const std::vector<std::string> kModelNames{"ridge", "dt", "chebypoly", "chebytree", "erbf"};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw Error("'" + path.string() + "': " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

// "key=value" with value typed as bool, integer, float or string.
TrialParams parse_param_overrides(const std::vector<std::string>& items) {
  TrialParams p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string val = item.substr(eq + 1);
    if (val == "true" || val == "false") {
      p[key] = val == "true";
      continue;
    }
    try {
      std::size_t used = 0;
      const long long i = std::stoll(val, &used);
      if (used == val.size()) {
        p[key] = static_cast<std::int64_t>(i);
        continue;
      }
      const double d = std::stod(val, &used);
      if (used == val.size()) {
        p[key] = d;
        continue;
      }
    } catch (const std::exception&) {
    }
    p[key] = val;
  }
  return p;
}

struct FitArgs {
  std::string model;
  fs::path data;
  std::string target = "target";
  fs::path out;
  std::vector<std::string> params;
  bool tune = false;
  std::optional<int> budget;
  std::uint64_t seed = 0;
  std::optional<Index> max_samples;
};

int run_fit(const FitArgs& a) {
  const ModelKind kind = parse_model_kind(a.model);
  Dataset raw = load_csv(a.data, a.target);
  if (a.max_samples) raw = subsample(raw, *a.max_samples, a.seed);
  const Dataset train = impute_median(raw, raw);

  TrialParams params = parse_param_overrides(a.params);
  json search_doc = nullptr;
  if (a.tune) {
    const SearchSpace space = default_search_space(kind);
    const int budget = a.budget.value_or(space.trial_budget);
    const int folds = inner_fold_count(raw.n());
    const SearchResult res = random_search(
        space, [&](const TrialParams& p) { return inner_cv_score(kind, p, raw, folds, a.seed + 1); }, budget,
        a.seed);
    params = res.best;
    search_doc = {{"budget", budget}, {"inner_folds", folds}, {"best_score", res.best_score}};
    std::cerr << "tuned " << a.model << ": inner-CV R2 " << res.best_score << " over " << budget << " trials\n";
  }

  const FittedModel model = fit_model(kind, params, train);
  std::vector<double> medians;
  for (Index j = 0; j < raw.d(); ++j) {
    const Vector col = raw.features.col(j);
    medians.push_back(nan_median(std::span<const double>(col.data(), static_cast<std::size_t>(col.size()))).value_or(0.0));
  }
  const Vector fitted = predict(model, train.features);
  json doc{{"format", kModelFileFormat},
           {"version", 1},
           {"target", a.target},
           {"feature_names", train.feature_names},
           {"impute_medians", medians},
           {"best_params", params_to_json(params)},
           {"search", search_doc},
           {"train_r2", r2(train.target, fitted)},
           {"model", model_to_json(model)}};
  std::ofstream out(a.out);
  if (!out) throw Error("cannot write '" + a.out.string() + "'");
  // Full precision so reloaded weights reproduce fit-time predictions exactly.
  out << doc.dump() << '\n';
  std::cerr << "wrote " << a.out << "\n";
  return 0;
}

struct PredictArgs {
  fs::path model;
  fs::path data;
  fs::path out;
};

int run_predict(const PredictArgs& a) {
  const json doc = read_json(a.model);
  if (doc.value("format", "") != kModelFileFormat) throw Error("'" + a.model.string() + "' is not a model file");
  const auto names = doc.at("feature_names").get<std::vector<std::string>>();
  const auto medians = doc.at("impute_medians").get<std::vector<double>>();
  const FittedModel model = model_from_json(doc.at("model"));
  Matrix x = load_csv_columns(a.data, names);
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      if (std::isnan(x(i, j))) x(i, j) = medians[static_cast<std::size_t>(j)];
    }
  }
  const Vector preds = predict(model, x);
  std::ofstream out(a.out);
  if (!out) throw Error("cannot write '" + a.out.string() + "'");
  out << std::setprecision(17) << "prediction\n";
  for (Index i = 0; i < preds.size(); ++i) out << preds(i) << '\n';
  return 0;
}

struct GenArgs {
  std::string kind;
  Index n = 0;
  std::uint64_t seed = 0;
  std::optional<double> noise;
  fs::path out;
};

int run_gen(const GenArgs& a) {
  SynthSpec spec;
  spec.kind = parse_synth_kind(a.kind);
  spec.n = a.n > 0 ? a.n : synth_catalogue_n(spec.kind);
  spec.seed = a.seed;
  spec.noise_std = a.noise;
  write_csv(a.out, generate(spec), "target");
  return 0;
}

struct BenchDataset {
  std::string name;
  Dataset data;
};

BenchDataset load_bench_dataset(const json& entry, const fs::path& base) {
  BenchDataset out;
  std::optional<Index> max_samples;
  if (entry.contains("max_samples") && !entry.at("max_samples").is_null()) {
    max_samples = entry.at("max_samples").get<Index>();
  }
  const std::uint64_t seed = entry.value("seed", std::uint64_t{0});
  if (entry.contains("synth")) {
    const json& s = entry.at("synth");
    SynthSpec spec;
    spec.kind = parse_synth_kind(s.at("kind").get<std::string>());
    spec.n = s.value("n", synth_catalogue_n(spec.kind));
    spec.seed = s.value("seed", std::uint64_t{0});
    if (s.contains("noise_std") && !s.at("noise_std").is_null()) spec.noise_std = s.at("noise_std").get<double>();
    out.name = entry.value("name", std::string(synth_name(spec.kind)));
    out.data = generate(spec);
  } else if (entry.contains("path")) {
    fs::path p = entry.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    out.name = entry.value("name", p.stem().string());
    out.data = load_csv(p, entry.value("target", std::string("target")));
  } else {
    throw Error("dataset entry needs either 'synth' or 'path'");
  }
  if (max_samples) out.data = subsample(out.data, *max_samples, seed);
  out.data = drop_quasi_constant(out.data);
  return out;
}

fs::path output_path(const json& outputs, const char* key, const fs::path& base, const char* fallback) {
  fs::path p = outputs.value(key, std::string(fallback));
  return p.is_relative() ? base / p : p;
}

void emit_report(const BenchmarkReport& rep, const fs::path& report, const fs::path& rank_csv, const fs::path& r2_csv) {
  write_json(report, report_to_json(rep));
  write_rank_csv(rank_csv, rep);
  write_r2_csv(r2_csv, rep);
}

int run_bench(const fs::path& config_path, std::optional<int> parallel_override) {
  const json cfg = read_json(config_path);
  const fs::path base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");

  NestedCvConfig cv;
  cv.outer_k = cfg.value("outer_k", 5);
  cv.outer_seed = cfg.value("outer_seed", std::uint64_t{42});
  cv.search_seed = cfg.value("search_seed", std::uint64_t{0});
  cv.parallel_folds = parallel_override.value_or(cfg.value("parallel_folds", 1));
  if (cfg.contains("trial_budget") && !cfg.at("trial_budget").is_null()) cv.trial_budget = cfg.at("trial_budget").get<int>();
  if (cv.outer_k < 2) throw Error("config: outer_k must be >= 2");

  std::vector<ModelKind> kinds;
  std::vector<std::string> model_names;
  for (const auto& m : cfg.value("models", json(kModelNames))) {
    kinds.push_back(parse_model_kind(m.get<std::string>()));
    model_names.push_back(std::string(model_name(kinds.back())));
  }
  if (kinds.empty()) throw Error("config: 'models' is empty");
  if (!cfg.contains("datasets") || cfg.at("datasets").empty()) throw Error("config: 'datasets' is empty");

  const json outputs = cfg.value("output", json::object());
  const fs::path results_path = output_path(outputs, "results", base, "results.jsonl");
  const fs::path report_path = output_path(outputs, "report", base, "report.json");
  const fs::path rank_csv = output_path(outputs, "rank_csv", base, "ranks.csv");
  const fs::path r2_csv = output_path(outputs, "r2_csv", base, "r2_adj.csv");

  std::vector<FoldResult> all;
  bool pair_failed = false;
  for (const auto& entry : cfg.at("datasets")) {
    const BenchDataset ds = load_bench_dataset(entry, base);
    for (std::size_t m = 0; m < kinds.size(); ++m) {
      auto folds = nested_cv_run(ds.data, ds.name, kinds[m], default_search_space(kinds[m]), cv);
      int failed = 0;
      double mean = 0.0;
      for (const auto& f : folds) {
        if (f.failed) {
          ++failed;
          std::cerr << "  " << ds.name << "/" << model_names[m] << " fold " << f.fold << " failed: " << f.error << "\n";
        } else {
          mean += f.test_r2_adj;
        }
      }
      if (failed == static_cast<int>(folds.size())) pair_failed = true;
      const int ok = static_cast<int>(folds.size()) - failed;
      std::cerr << ds.name << " " << model_names[m] << ": mean test R2adj "
                << (ok > 0 ? mean / ok : std::nan("")) << " (" << failed << " failed folds)\n";
      all.insert(all.end(), std::make_move_iterator(folds.begin()), std::make_move_iterator(folds.end()));
    }
  }
  write_results_jsonl(results_path, all);
  emit_report(build_report(all, model_names), report_path, rank_csv, r2_csv);
  return pair_failed ? kExitRuntime : 0;
}

struct ReportArgs {
  fs::path results;
  fs::path out = "report.json";
  fs::path rank_csv = "ranks.csv";
  fs::path r2_csv = "r2_adj.csv";
  std::vector<std::string> models;
};

int run_report(const ReportArgs& a) {
  const auto results = read_results_jsonl(a.results);
  if (results.empty()) throw Error("'" + a.results.string() + "' contains no fold results");
  emit_report(build_report(results, a.models), a.out, a.rank_csv, a.r2_csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth-model regression benchmark"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model on a CSV and write a model file");
  fit_cmd->add_option("--model", fit.model, "ridge, dt, chebypoly, chebytree or erbf")->required()->check(CLI::IsMember(kModelNames));
  fit_cmd->add_option("--data", fit.data, "Training CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--target", fit.target, "Target column");
  fit_cmd->add_option("--out", fit.out, "Model file")->required();
  fit_cmd->add_option("--param", fit.params, "Hyperparameter key=value (repeatable)");
  fit_cmd->add_flag("--tune", fit.tune, "Random search with inner CV before the final fit");
  fit_cmd->add_option("--budget", fit.budget, "Trial budget for --tune")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Search and subsampling seed");
  fit_cmd->add_option("--max-samples", fit.max_samples, "Subsample rows without replacement")->check(CLI::PositiveNumber);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Predict with a model file");
  pred_cmd->add_option("--model", pred.model, "Model file")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--data", pred.data, "CSV with the model's feature columns")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--out", pred.out, "Output CSV")->required();

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset as CSV");
  gen_cmd->add_option("--kind", gen.kind)->required()->check(
      CLI::IsMember({"friedman1", "friedman1_d100", "synthetic_step", "synthetic_piecewise", "synthetic_multithreshold"}));
  gen_cmd->add_option("--n", gen.n, "Rows (default: catalogue size)");
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--noise", gen.noise, "Noise std (default: per kind)")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", gen.out)->required();

  fs::path config;
  std::optional<int> parallel;
  auto* bench_cmd = app.add_subcommand("bench", "Run the nested-CV benchmark described by a JSON config");
  bench_cmd->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--parallel-folds", parallel, "Override parallel_folds")->check(CLI::PositiveNumber);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Rebuild the report from a results file");
  rep_cmd->add_option("results", rep.results, "Results JSONL")->required()->check(CLI::ExistingFile);
  rep_cmd->add_option("--out", rep.out, "Report JSON");
  rep_cmd->add_option("--rank-csv", rep.rank_csv);
  rep_cmd->add_option("--r2-csv", rep.r2_csv);
  rep_cmd->add_option("--models", rep.models, "Restrict to these models")->delimiter(',')->check(CLI::IsMember(kModelNames));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*pred_cmd) return run_predict(pred);
    if (*gen_cmd) return run_gen(gen);
    if (*bench_cmd) return run_bench(config, parallel);
    if (*rep_cmd) return run_report(rep);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
