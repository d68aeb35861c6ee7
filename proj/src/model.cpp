#include "smoothreg/model.hpp"

#include "smoothreg/error.hpp"

namespace smoothreg {

using nlohmann::json;

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kRidge: return "ridge";
    case ModelKind::kDecisionTree: return "dt";
    case ModelKind::kChebyPoly: return "chebypoly";
    case ModelKind::kChebyTree: return "chebytree";
    case ModelKind::kErbf: return "erbf";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto kind : kAllModelKinds) {
    if (model_name(kind) == name) return kind;
  }
  throw Error("unknown model '" + std::string(name) + "' (expected ridge, dt, chebypoly, chebytree or erbf)");
}

ModelKind FittedModel::kind() const {
  return static_cast<ModelKind>(model.index());
}

Index FittedModel::n_features() const {
  struct {
    Index operator()(const RidgeModel& m) const { return m.scaler.means().size(); }
    Index operator()(const RegressionTree& m) const { return m.n_features; }
    Index operator()(const ChebyPolyModel& m) const { return m.n_features(); }
    Index operator()(const ChebyTreeModel& m) const { return m.tree.n_features; }
    Index operator()(const ErbfModel& m) const { return m.centers.cols(); }
  } visitor;
  return std::visit(visitor, model);
}

namespace {

SampleThreshold threshold_param(const TrialParams& p, const std::string& key, SampleThreshold fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(&it->second)) return SampleThreshold::count(*i);
  if (const auto* d = std::get_if<double>(&it->second)) return SampleThreshold::fraction(*d);
  throw Error("parameter '" + key + "' must be a count or a fraction");
}

ErbfConfig erbf_config(const TrialParams& p) {
  ErbfConfig cfg;
  cfg.seed = kModelSeed;
  if (!get_bool(p, "n_rbf_auto", !p.contains("n_rbf"))) cfg.n_rbf = get_int(p, "n_rbf", 40);
  cfg.alpha = get_double(p, "alpha", 1.0);
  const auto centers = get_string(p, "center_init", "lipschitz");
  if (centers == "lipschitz") {
    cfg.center_init = CenterInit::kLipschitz;
  } else if (centers == "kmeans") {
    cfg.center_init = CenterInit::kKMeans;
  } else {
    throw Error("erbf: unknown center_init '" + centers + "'");
  }
  const auto widths = get_string(p, "width_init", "local_ridge");
  if (widths == "local_ridge") {
    cfg.width_init = WidthInit::kLocalRidge;
  } else if (widths == "local_variance") {
    cfg.width_init = WidthInit::kLocalVariance;
  } else {
    throw Error("erbf: unknown width_init '" + widths + "'");
  }
  cfg.resolve_weights_in_loop = get_bool(p, "resolve_weights_in_loop", true);
  return cfg;
}

ChebyBasisConfig cheby_config(const TrialParams& p) {
  ChebyBasisConfig cfg;
  cfg.complexity = static_cast<int>(get_int(p, "complexity", 3));
  cfg.include_interactions = get_bool(p, "include_interactions", false);
  cfg.max_interaction_complexity = static_cast<int>(get_int(p, "max_interaction_complexity", 1));
  return cfg;
}

}  // namespace

FittedModel fit_model(ModelKind kind, const TrialParams& params, const Dataset& train) {
  FittedModel fm;
  fm.params = params;
  switch (kind) {
    case ModelKind::kRidge:
      fm.model = ridge_fit(train, get_double(params, "alpha", 1.0));
      break;
    case ModelKind::kDecisionTree: {
      CartParams cp;
      cp.max_depth = static_cast<int>(get_int(params, "max_depth", 5));
      cp.min_samples_leaf = threshold_param(params, "min_samples_leaf", SampleThreshold::count(1));
      cp.min_samples_split = threshold_param(params, "min_samples_split", SampleThreshold::count(2));
      auto tree = cart_fit(train, cp);
      tree.leaf_rows.assign(tree.leaf_rows.size(), {});
      fm.model = std::move(tree);
      break;
    }
    case ModelKind::kChebyPoly:
      fm.model = chebypoly_fit(train, cheby_config(params), get_double(params, "alpha", 1.0));
      break;
    case ModelKind::kChebyTree: {
      ChebyTreeParams tp;
      tp.complexity = static_cast<int>(get_int(params, "complexity", 2));
      tp.max_depth = static_cast<int>(get_int(params, "max_depth", 3));
      tp.min_samples_leaf = threshold_param(params, "min_samples_leaf", SampleThreshold::fraction(0.05));
      tp.alpha = get_double(params, "alpha", 1.0);
      auto model = chebytree_fit(train, tp);
      model.tree.leaf_rows.assign(model.tree.leaf_rows.size(), {});
      fm.model = std::move(model);
      break;
    }
    case ModelKind::kErbf:
      fm.model = erbf_fit(train, erbf_config(params));
      break;
  }
  return fm;
}

Vector predict(const FittedModel& model, const Matrix& x) {
  struct {
    const Matrix& x;
    Vector operator()(const RidgeModel& m) const { return ridge_predict(m, x); }
    Vector operator()(const RegressionTree& m) const { return cart_predict(m, x); }
    Vector operator()(const ChebyPolyModel& m) const { return chebypoly_predict(m, x); }
    Vector operator()(const ChebyTreeModel& m) const { return chebytree_predict(m, x); }
    Vector operator()(const ErbfModel& m) const { return erbf_predict(m, x); }
  } visitor{x};
  return std::visit(visitor, model.model);
}

SearchSpace default_search_space(ModelKind kind) {
  SearchSpace s;
  const LogUniform penalty{1e-3, 1e3};
  switch (kind) {
    case ModelKind::kRidge:
      s.params = {{"alpha", penalty, {}}};
      s.trial_budget = 20;
      break;
    case ModelKind::kDecisionTree:
      s.params = {{"max_depth", IntUniform{1, 20}, {}},
                  {"min_samples_leaf", Uniform{0.005, 0.1}, {}},
                  {"min_samples_split", Uniform{0.01, 0.1}, {}}};
      s.trial_budget = 25;
      break;
    case ModelKind::kChebyPoly:
      s.params = {{"complexity", IntUniform{1, 14}, {}},
                  {"alpha", penalty, {}},
                  {"include_interactions", Categorical{{true, false}}, {}},
                  {"max_interaction_complexity", Categorical{{std::int64_t{1}, std::int64_t{2}}},
                   Condition{"include_interactions", true}}};
      s.trial_budget = 30;
      break;
    case ModelKind::kChebyTree:
      s.params = {{"complexity", IntUniform{1, 6}, {}},
                  {"alpha", penalty, {}},
                  {"max_depth", IntUniform{1, 12}, {}},
                  {"min_samples_leaf", Uniform{0.01, 0.1}, {}}};
      s.trial_budget = 30;
      break;
    case ModelKind::kErbf:
      s.params = {{"n_rbf_auto", Categorical{{true, false}}, {}},
                  {"n_rbf", IntUniform{10, 80}, Condition{"n_rbf_auto", false}},
                  {"alpha", penalty, {}},
                  {"center_init", Categorical{{std::string("lipschitz"), std::string("kmeans")}}, {}},
                  {"width_init", Categorical{{std::string("local_ridge"), std::string("local_variance")}}, {}}};
      s.trial_budget = 30;
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json vec_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(std::move(r));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix json_mat(const json& j) {
  Matrix m(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  const auto& data = j.at("data");
  if (static_cast<Index>(data.size()) != m.rows()) throw Error("model json: matrix row count mismatch");
  for (Index i = 0; i < m.rows(); ++i) {
    const auto r = data[static_cast<std::size_t>(i)].get<std::vector<double>>();
    if (static_cast<Index>(r.size()) != m.cols()) throw Error("model json: matrix column count mismatch");
    for (Index k = 0; k < m.cols(); ++k) m(i, k) = r[static_cast<std::size_t>(k)];
  }
  return m;
}

json stats_json(const TargetStats& s) { return {{"mean", s.mean}, {"std", s.std}}; }
TargetStats json_stats(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

json ridge_sol_json(const RidgeSolution& s) { return {{"weights", vec_json(s.weights)}, {"intercept", s.intercept}}; }
RidgeSolution json_ridge_sol(const json& j) { return {json_vec(j.at("weights")), j.at("intercept").get<double>()}; }

json standardizer_json(const Standardizer& s) { return {{"means", vec_json(s.means())}, {"stds", vec_json(s.stds())}}; }
Standardizer json_standardizer(const json& j) { return {json_vec(j.at("means")), json_vec(j.at("stds"))}; }

json minmax_json(const MinMaxScaler& s) {
  return {{"mins", vec_json(s.mins())}, {"maxs", vec_json(s.maxs())}, {"clip", s.clip()}};
}
MinMaxScaler json_minmax(const json& j) {
  return {json_vec(j.at("mins")), json_vec(j.at("maxs")), j.at("clip").get<bool>()};
}

json tree_json(const RegressionTree& t) {
  json nodes = json::array();
  for (const auto& nd : t.nodes) {
    nodes.push_back({{"feature", nd.feature}, {"threshold", nd.threshold}, {"left", nd.left},
                     {"right", nd.right}, {"value", nd.value}, {"n_samples", nd.n_samples},
                     {"leaf_id", nd.leaf_id}});
  }
  return {{"nodes", std::move(nodes)}, {"n_leaves", t.n_leaves()}, {"max_depth", t.max_depth},
          {"min_samples_leaf", t.min_samples_leaf}, {"min_samples_split", t.min_samples_split},
          {"n_features", t.n_features}};
}

RegressionTree json_tree(const json& j) {
  RegressionTree t;
  for (const auto& nd : j.at("nodes")) {
    TreeNode n;
    n.feature = nd.at("feature").get<Index>();
    n.threshold = nd.at("threshold").get<double>();
    n.left = nd.at("left").get<int>();
    n.right = nd.at("right").get<int>();
    n.value = nd.at("value").get<double>();
    n.n_samples = nd.at("n_samples").get<Index>();
    n.leaf_id = nd.at("leaf_id").get<int>();
    t.nodes.push_back(n);
  }
  if (t.nodes.empty()) throw Error("model json: tree has no nodes");
  t.leaf_rows.resize(j.at("n_leaves").get<std::size_t>());
  t.max_depth = j.at("max_depth").get<int>();
  t.min_samples_leaf = j.at("min_samples_leaf").get<Index>();
  t.min_samples_split = j.at("min_samples_split").get<Index>();
  t.n_features = j.at("n_features").get<Index>();
  return t;
}

json chebypoly_json(const ChebyPolyModel& m) {
  return {{"scaler", minmax_json(m.scaler)},
          {"complexity", m.basis.complexity},
          {"include_interactions", m.basis.include_interactions},
          {"max_interaction_complexity", m.basis.max_interaction_complexity},
          {"high_dim_threshold", m.basis.high_dim_threshold},
          {"interaction_set", m.interaction_set},
          {"alpha", m.alpha},
          {"solution", ridge_sol_json(m.solution)},
          {"y_stats", stats_json(m.y_stats)}};
}

ChebyPolyModel json_chebypoly(const json& j) {
  ChebyPolyModel m;
  m.scaler = json_minmax(j.at("scaler"));
  m.basis.complexity = j.at("complexity").get<int>();
  m.basis.include_interactions = j.at("include_interactions").get<bool>();
  m.basis.max_interaction_complexity = j.at("max_interaction_complexity").get<int>();
  m.basis.high_dim_threshold = j.at("high_dim_threshold").get<Index>();
  m.interaction_set = j.at("interaction_set").get<std::vector<Index>>();
  m.alpha = j.at("alpha").get<double>();
  m.solution = json_ridge_sol(j.at("solution"));
  m.y_stats = json_stats(j.at("y_stats"));
  return m;
}

json threshold_json(const SampleThreshold& t) {
  if (const auto* c = std::get_if<std::int64_t>(&t.value)) return *c;
  return std::get<double>(t.value);
}

SampleThreshold json_threshold(const json& j) {
  if (j.is_number_integer()) return SampleThreshold::count(j.get<std::int64_t>());
  return SampleThreshold::fraction(j.get<double>());
}

json to_json_impl(const RidgeModel& m) {
  return {{"scaler", standardizer_json(m.scaler)}, {"solution", ridge_sol_json(m.solution)}, {"alpha", m.alpha}};
}
json to_json_impl(const RegressionTree& m) { return tree_json(m); }
json to_json_impl(const ChebyPolyModel& m) { return chebypoly_json(m); }
json to_json_impl(const ChebyTreeModel& m) {
  json leaves = json::array();
  for (const auto& leaf : m.leaf_models) {
    if (const auto* c = std::get_if<ConstantLeaf>(&leaf)) {
      leaves.push_back({{"type", "constant"}, {"value", c->value}});
    } else {
      leaves.push_back({{"type", "chebypoly"}, {"model", chebypoly_json(std::get<ChebyPolyModel>(leaf))}});
    }
  }
  return {{"tree", tree_json(m.tree)},
          {"leaves", std::move(leaves)},
          {"complexity", m.params.complexity},
          {"max_depth", m.params.max_depth},
          {"min_samples_leaf", threshold_json(m.params.min_samples_leaf)},
          {"alpha", m.params.alpha},
          {"y_stats", stats_json(m.y_stats)}};
}
json to_json_impl(const ErbfModel& m) {
  const auto& c = m.config;
  return {{"centers", mat_json(m.centers)},
          {"widths", mat_json(m.widths)},
          {"weights", vec_json(m.weights)},
          {"bias", m.bias},
          {"scaler", standardizer_json(m.feature_scaler)},
          {"y_stats", stats_json(m.y_stats)},
          {"config",
           {{"n_rbf", c.n_rbf ? json(*c.n_rbf) : json("auto")},
            {"alpha", c.alpha},
            {"center_init", c.center_init == CenterInit::kLipschitz ? "lipschitz" : "kmeans"},
            {"width_init", c.width_init == WidthInit::kLocalRidge ? "local_ridge" : "local_variance"},
            {"width_optim_iters", c.width_optim_iters},
            {"resolve_weights_in_loop", c.resolve_weights_in_loop},
            {"lipschitz_k", c.lipschitz_k},
            {"lipschitz_eps", c.lipschitz_eps},
            {"lipschitz_clip_pct", c.lipschitz_clip_pct},
            {"seed", c.seed}}}};
}

ErbfModel json_erbf(const json& j) {
  ErbfModel m;
  m.centers = json_mat(j.at("centers"));
  m.widths = json_mat(j.at("widths"));
  m.weights = json_vec(j.at("weights"));
  m.bias = j.at("bias").get<double>();
  m.feature_scaler = json_standardizer(j.at("scaler"));
  m.y_stats = json_stats(j.at("y_stats"));
  const auto& c = j.at("config");
  if (c.at("n_rbf").is_number_integer()) m.config.n_rbf = c.at("n_rbf").get<Index>();
  m.config.alpha = c.at("alpha").get<double>();
  m.config.center_init = c.at("center_init") == "kmeans" ? CenterInit::kKMeans : CenterInit::kLipschitz;
  m.config.width_init = c.at("width_init") == "local_variance" ? WidthInit::kLocalVariance : WidthInit::kLocalRidge;
  m.config.width_optim_iters = c.at("width_optim_iters").get<int>();
  m.config.resolve_weights_in_loop = c.value("resolve_weights_in_loop", true);
  m.config.lipschitz_k = c.at("lipschitz_k").get<Index>();
  m.config.lipschitz_eps = c.at("lipschitz_eps").get<double>();
  m.config.lipschitz_clip_pct = c.at("lipschitz_clip_pct").get<double>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  if (m.widths.rows() != m.centers.rows() || m.widths.cols() != m.centers.cols() ||
      m.weights.size() != m.centers.rows()) {
    throw Error("model json: erbf parameter shapes disagree");
  }
  return m;
}

}  // namespace

json model_to_json(const FittedModel& model) {
  json doc;
  doc["format"] = "smoothreg.model";
  doc["version"] = kModelFormatVersion;
  doc["kind"] = std::string(model_name(model.kind()));
  doc["params"] = params_to_json(model.params);
  doc["model"] = std::visit([](const auto& m) { return to_json_impl(m); }, model.model);
  return doc;
}

FittedModel model_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "smoothreg.model") throw Error("model json: not a smoothreg model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error("model json: unsupported version " + std::to_string(version));
    }
    FittedModel fm;
    fm.params = params_from_json(doc.value("params", json::object()));
    const auto kind = parse_model_kind(doc.at("kind").get<std::string>());
    const auto& j = doc.at("model");
    switch (kind) {
      case ModelKind::kRidge: {
        RidgeModel m;
        m.scaler = json_standardizer(j.at("scaler"));
        m.solution = json_ridge_sol(j.at("solution"));
        m.alpha = j.at("alpha").get<double>();
        fm.model = std::move(m);
        break;
      }
      case ModelKind::kDecisionTree:
        fm.model = json_tree(j);
        break;
      case ModelKind::kChebyPoly:
        fm.model = json_chebypoly(j);
        break;
      case ModelKind::kChebyTree: {
        ChebyTreeModel m;
        m.tree = json_tree(j.at("tree"));
        for (const auto& leaf : j.at("leaves")) {
          if (leaf.at("type") == "constant") {
            m.leaf_models.emplace_back(ConstantLeaf{leaf.at("value").get<double>()});
          } else {
            m.leaf_models.emplace_back(json_chebypoly(leaf.at("model")));
          }
        }
        if (static_cast<int>(m.leaf_models.size()) != m.tree.n_leaves()) {
          throw Error("model json: chebytree leaf count mismatch");
        }
        m.params.complexity = j.at("complexity").get<int>();
        m.params.max_depth = j.at("max_depth").get<int>();
        m.params.min_samples_leaf = json_threshold(j.at("min_samples_leaf"));
        m.params.alpha = j.at("alpha").get<double>();
        m.y_stats = json_stats(j.at("y_stats"));
        fm.model = std::move(m);
        break;
      }
      case ModelKind::kErbf:
        fm.model = json_erbf(j);
        break;
    }
    return fm;
  } catch (const json::exception& e) {
    throw Error(std::string("model json: ") + e.what());
  }
}

}  // namespace smoothreg
