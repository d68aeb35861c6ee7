#include "smoothreg/chebytree.hpp"

#include "smoothreg/error.hpp"

#include <algorithm>

namespace smoothreg {

Index chebytree_fallback_threshold(int complexity) {
  return std::max<Index>(2 * (complexity + 1), 10);
}

ChebyTreeModel chebytree_fit(const Dataset& train, const ChebyTreeParams& params) {
  if (params.complexity < 1) throw Error("chebytree_fit: complexity must be >= 1");
  if (!(params.alpha > 0.0)) throw Error("chebytree_fit: alpha must be > 0");

  ChebyTreeModel model;
  model.params = params;
  model.tree = cart_fit(train, {params.max_depth, params.min_samples_leaf, SampleThreshold::count(2)});
  model.y_stats = TargetStats::of(train.target);

  std::vector<double> leaf_value(static_cast<std::size_t>(model.tree.n_leaves()));
  for (const auto& nd : model.tree.nodes) {
    if (nd.feature < 0) leaf_value[static_cast<std::size_t>(nd.leaf_id)] = nd.value;
  }

  const ChebyBasisConfig leaf_basis{params.complexity, false, 1, 30};
  const Index min_rows = chebytree_fallback_threshold(params.complexity);
  model.leaf_models.reserve(leaf_value.size());
  for (std::size_t leaf = 0; leaf < leaf_value.size(); ++leaf) {
    const auto& rows = model.tree.leaf_rows[leaf];
    if (static_cast<Index>(rows.size()) < min_rows) {
      model.leaf_models.emplace_back(ConstantLeaf{leaf_value[leaf]});
      continue;
    }
    model.leaf_models.emplace_back(chebypoly_fit(train.subset(rows), leaf_basis, params.alpha));
  }
  return model;
}

Vector chebytree_predict(const ChebyTreeModel& model, const Matrix& x) {
  if (x.cols() != model.tree.n_features) {
    throw Error("chebytree_predict: expected " + std::to_string(model.tree.n_features) +
                " features, got " + std::to_string(x.cols()));
  }
  std::vector<std::vector<Index>> routed(model.leaf_models.size());
  for (Index i = 0; i < x.rows(); ++i) {
    routed[static_cast<std::size_t>(cart_route(model.tree, x, i))].push_back(i);
  }
  Vector out(x.rows());
  for (std::size_t leaf = 0; leaf < routed.size(); ++leaf) {
    const auto& rows = routed[leaf];
    if (rows.empty()) continue;
    if (const auto* c = std::get_if<ConstantLeaf>(&model.leaf_models[leaf])) {
      for (Index r : rows) out(r) = c->value;
      continue;
    }
    Matrix sub(static_cast<Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) sub.row(static_cast<Index>(k)) = x.row(rows[k]);
    const Vector leaf_pred = chebypoly_predict(std::get<ChebyPolyModel>(model.leaf_models[leaf]), sub);
    for (std::size_t k = 0; k < rows.size(); ++k) out(rows[k]) = leaf_pred(static_cast<Index>(k));
  }
  model.y_stats.clip(out);
  return out;
}

}  // namespace smoothreg
