#include "smoothreg/dataset.hpp"

#include "smoothreg/error.hpp"
#include "smoothreg/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace smoothreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Splits one logical CSV record. Quoted fields may contain separators,
// doubled quotes and newlines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// nullopt for a non-numeric cell; NaN for an empty one.
std::optional<double> parse_cell(std::string_view raw) {
  auto s = trim(raw);
  if (s.empty()) return kNaN;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() != target.size()) {
    throw Error("dataset: feature rows (" + std::to_string(features.rows()) +
                ") != target length (" + std::to_string(target.size()) + ")");
  }
  if (static_cast<Index>(feature_names.size()) != features.cols()) {
    throw Error("dataset: feature_names size does not match column count");
  }
  if (features.cols() < 1) throw Error("dataset: needs at least one feature");
  if (features.rows() < 2) throw Error("dataset: needs at least two rows");
}

bool Dataset::has_missing() const {
  return !features.allFinite() || !target.allFinite();
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), d());
  out.target.resize(static_cast<Index>(rows.size()));
  for (Index i = 0; i < static_cast<Index>(rows.size()); ++i) {
    out.features.row(i) = features.row(rows[i]);
    out.target(i) = target(rows[i]);
  }
  out.feature_names = feature_names;
  return out;
}

std::vector<Index> FoldPlan::test_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> FoldPlan::train_indices(int fold) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
  }
  return out;
}

std::vector<Index> FoldPlan::fold_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  return sizes;
}

Standardizer::Standardizer(Vector means, Vector stds)
    : means_(std::move(means)), stds_(std::move(stds)) {}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() < 1) throw Error("standardizer: empty input");
  Vector means = x.colwise().mean().transpose();
  Vector stds(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - means(j)).square().mean();
    stds(j) = std::max(std::sqrt(var), kStdFloor);
  }
  return {std::move(means), std::move(stds)};
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != means_.size()) throw Error("standardizer: dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    out.col(j) = (x.col(j).array() - means_(j)) / stds_(j);
  }
  return out;
}

MinMaxScaler::MinMaxScaler(Vector mins, Vector maxs, bool clip)
    : mins_(std::move(mins)), maxs_(std::move(maxs)), clip_(clip) {}

MinMaxScaler MinMaxScaler::fit(const Matrix& x, bool clip) {
  if (x.rows() < 1) throw Error("minmax scaler: empty input");
  return {x.colwise().minCoeff().transpose(), x.colwise().maxCoeff().transpose(), clip};
}

Matrix MinMaxScaler::apply(const Matrix& x) const {
  if (x.cols() != mins_.size()) throw Error("minmax scaler: dimension mismatch");
  Matrix out(x.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double range = maxs_(j) - mins_(j);
    if (!(range > 0.0)) {
      out.col(j).setZero();
      continue;
    }
    out.col(j) = 2.0 * (x.col(j).array() - mins_(j)) / range - 1.0;
    if (clip_) out.col(j) = out.col(j).cwiseMax(-1.0).cwiseMin(1.0);
  }
  return out;
}

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_csv: cannot open '" + path.string() + "'");

  std::vector<std::string> header;
  if (!read_record(in, header)) throw Error("load_csv: '" + path.string() + "' is empty");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim(h));

  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    throw Error("load_csv: target column '" + target_column + "' not in header");
  }
  const auto target_pos = static_cast<std::size_t>(target_it - header.begin());
  if (header.size() < 2) throw Error("load_csv: no feature columns");

  std::vector<std::vector<double>> columns(header.size());
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (fields.size() != header.size()) {
      throw Error("load_csv: line " + std::to_string(line) + " has " +
                  std::to_string(fields.size()) + " fields, expected " +
                  std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto v = parse_cell(fields[c]);
      if (!v) {
        throw Error("load_csv: column '" + header[c] + "' has non-numeric value '" +
                    fields[c] + "' at line " + std::to_string(line) +
                    " (categorical columns are not supported)");
      }
      columns[c].push_back(*v);
    }
  }

  for (std::size_t c = 0; c < header.size(); ++c) {
    const bool any_value = std::any_of(columns[c].begin(), columns[c].end(),
                                       [](double v) { return !std::isnan(v); });
    if (!any_value) throw Error("load_csv: column '" + header[c] + "' has no numeric values");
  }

  std::vector<std::size_t> keep;
  const auto& tcol = columns[target_pos];
  for (std::size_t r = 0; r < tcol.size(); ++r) {
    if (!std::isnan(tcol[r])) keep.push_back(r);
  }
  if (keep.size() < 2) throw Error("load_csv: fewer than two rows with a target value");

  Dataset ds;
  const auto n = static_cast<Index>(keep.size());
  ds.features.resize(n, static_cast<Index>(header.size() - 1));
  ds.target.resize(n);
  Index out_col = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == target_pos) {
      for (Index i = 0; i < n; ++i) ds.target(i) = tcol[keep[static_cast<std::size_t>(i)]];
      continue;
    }
    for (Index i = 0; i < n; ++i) {
      ds.features(i, out_col) = columns[c][keep[static_cast<std::size_t>(i)]];
    }
    ds.feature_names.push_back(header[c]);
    ++out_col;
  }
  ds.validate();
  return ds;
}

Matrix load_csv_columns(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_csv: cannot open '" + path.string() + "'");
  std::vector<std::string> header;
  if (!read_record(in, header)) throw Error("load_csv: '" + path.string() + "' is empty");
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  for (auto& h : header) h = std::string(trim(h));

  std::vector<std::size_t> pos;
  for (const auto& name : columns) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("load_csv: column '" + name + "' not in header");
    pos.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  std::size_t line = 1;
  while (read_record(in, fields)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != header.size()) {
      throw Error("load_csv: line " + std::to_string(line) + " has " + std::to_string(fields.size()) +
                  " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> row;
    for (std::size_t c : pos) {
      auto v = parse_cell(fields[c]);
      if (!v) {
        throw Error("load_csv: column '" + header[c] + "' has non-numeric value '" + fields[c] +
                    "' at line " + std::to_string(line));
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  Matrix x(static_cast<Index>(rows.size()), static_cast<Index>(columns.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < pos.size(); ++c) x(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return x;
}

void write_csv(const std::filesystem::path& path, const Dataset& ds,
               const std::string& target_name) {
  std::ofstream out(path);
  if (!out) throw Error("write_csv: cannot open '" + path.string() + "'");
  out << std::setprecision(17);
  for (const auto& name : ds.feature_names) out << name << ',';
  out << target_name << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    for (Index j = 0; j < ds.d(); ++j) {
      if (!std::isnan(ds.features(i, j))) out << ds.features(i, j);
      out << ',';
    }
    out << ds.target(i) << '\n';
  }
}

std::optional<double> nan_median(std::span<const double> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!std::isnan(x)) v.push_back(x);
  }
  if (v.empty()) return std::nullopt;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Dataset impute_median(const Dataset& train, const Dataset& apply_to) {
  if (train.d() != apply_to.d()) throw Error("impute_median: dimension mismatch");
  Dataset out = apply_to;
  for (Index j = 0; j < train.d(); ++j) {
    const auto col = train.features.col(j);
    const auto med = nan_median(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
    if (!med) {
      throw Error("impute_median: training column '" + train.feature_names[static_cast<std::size_t>(j)] +
                  "' is entirely missing");
    }
    for (Index i = 0; i < out.n(); ++i) {
      if (std::isnan(out.features(i, j))) out.features(i, j) = *med;
    }
  }
  return out;
}

Dataset drop_quasi_constant(const Dataset& ds, double mode_freq_threshold) {
  if (!(mode_freq_threshold > 0.0 && mode_freq_threshold <= 1.0)) {
    throw Error("drop_quasi_constant: threshold must lie in (0, 1]");
  }
  std::vector<Index> keep;
  for (Index j = 0; j < ds.d(); ++j) {
    std::map<double, Index> counts;
    Index nan_count = 0;
    for (Index i = 0; i < ds.n(); ++i) {
      const double v = ds.features(i, j);
      if (std::isnan(v)) {
        ++nan_count;
      } else {
        ++counts[v];
      }
    }
    Index mode = nan_count;
    for (const auto& [value, count] : counts) mode = std::max(mode, count);
    const double freq = static_cast<double>(mode) / static_cast<double>(ds.n());
    if (!(freq > mode_freq_threshold)) keep.push_back(j);
  }
  if (keep.empty()) throw Error("drop_quasi_constant: every column is quasi-constant");

  Dataset out;
  out.features.resize(ds.n(), static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.features.col(static_cast<Index>(c)) = ds.features.col(keep[c]);
    out.feature_names.push_back(ds.feature_names[static_cast<std::size_t>(keep[c])]);
  }
  out.target = ds.target;
  return out;
}

FoldPlan kfold_split(Index n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("kfold_split: need k >= 2");
  if (static_cast<Index>(k) > n) {
    throw Error("kfold_split: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(static_cast<std::size_t>(n), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    plan.assignments[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

int inner_fold_count(Index n_outer_train) {
  if (n_outer_train < 10) throw Error("inner_fold_count: need at least 10 training rows");
  return n_outer_train >= 1000 ? 3 : 5;
}

Dataset subsample(const Dataset& ds, Index max_samples, std::uint64_t seed) {
  if (max_samples < 2) throw Error("subsample: max_samples must be >= 2");
  if (ds.n() <= max_samples) return ds;
  std::vector<Index> order(static_cast<std::size_t>(ds.n()));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(max_samples));
  std::sort(order.begin(), order.end());
  return ds.subset(order);
}

}  // namespace smoothreg
