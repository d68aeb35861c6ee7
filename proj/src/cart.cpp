#include "smoothreg/cart.hpp"

#include "smoothreg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace smoothreg {

Index SampleThreshold::resolve(Index n) const {
  if (const auto* c = std::get_if<std::int64_t>(&value)) {
    if (*c < 1) throw Error("sample threshold: count must be >= 1");
    return static_cast<Index>(*c);
  }
  const double f = std::get<double>(value);
  if (!(f > 0.0 && f < 1.0)) throw Error("sample threshold: fraction must lie in (0, 1)");
  return std::max<Index>(1, static_cast<Index>(std::ceil(f * static_cast<double>(n))));
}

int RegressionTree::depth() const {
  int deepest = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    const auto& nd = nodes[static_cast<std::size_t>(node)];
    if (nd.feature >= 0) {
      stack.emplace_back(nd.left, depth + 1);
      stack.emplace_back(nd.right, depth + 1);
    }
  }
  return deepest;
}

SplitCandidate best_split(const Matrix& x, const Vector& y, std::span<const Index> rows,
                          Index min_samples_leaf) {
  SplitCandidate best;
  const auto n = static_cast<Index>(rows.size());
  if (n < 2 * min_samples_leaf || n < 2) return best;

  double mean = 0.0;
  for (Index r : rows) mean += y(r);
  mean /= static_cast<double>(n);
  double sse = 0.0;
  for (Index r : rows) sse += (y(r) - mean) * (y(r) - mean);
  if (!(sse > 0.0)) return best;
  const double min_gain = 1e-12 * sse;
  best.gain = min_gain;

  std::vector<Index> order(rows.begin(), rows.end());
  for (Index f = 0; f < x.cols(); ++f) {
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      const double va = x(a, f), vb = x(b, f);
      return va < vb || (va == vb && a < b);
    });
    double left_sum = 0.0;
    double total = 0.0;
    for (Index r : order) total += y(r) - mean;
    for (Index i = 0; i + 1 < n; ++i) {
      left_sum += y(order[static_cast<std::size_t>(i)]) - mean;
      const Index n_left = i + 1;
      const Index n_right = n - n_left;
      const double lo = x(order[static_cast<std::size_t>(i)], f);
      const double hi = x(order[static_cast<std::size_t>(i + 1)], f);
      if (!(lo < hi)) continue;
      if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                          right_sum * right_sum / static_cast<double>(n_right) -
                          total * total / static_cast<double>(n);
      if (gain > best.gain) {
        best.gain = gain;
        best.feature = f;
        best.threshold = 0.5 * (lo + hi);
        // Adjacent doubles can round the midpoint up onto `hi`.
        if (best.threshold >= hi) best.threshold = lo;
      }
    }
  }
  if (best.feature < 0) best.gain = 0.0;
  return best;
}

namespace {

struct Builder {
  const Matrix& x;
  const Vector& y;
  RegressionTree& tree;

  int grow(std::vector<Index> rows, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double mean = 0.0;
    for (Index r : rows) mean += y(r);
    mean /= static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].value = mean;
    tree.nodes[static_cast<std::size_t>(id)].n_samples = static_cast<Index>(rows.size());

    SplitCandidate split;
    if (depth < tree.max_depth && static_cast<Index>(rows.size()) >= tree.min_samples_split) {
      split = best_split(x, y, rows, tree.min_samples_leaf);
    }
    if (split.feature < 0) {
      tree.nodes[static_cast<std::size_t>(id)].leaf_id = static_cast<int>(tree.leaf_rows.size());
      tree.leaf_rows.push_back(std::move(rows));
      return id;
    }

    std::vector<Index> left, right;
    for (Index r : rows) (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

RegressionTree cart_fit(const Dataset& train, const CartParams& params) {
  train.validate();
  if (params.max_depth < 1) throw Error("cart_fit: max_depth must be >= 1");
  if (train.has_missing()) throw Error("cart_fit: training data contains missing values");

  RegressionTree tree;
  tree.max_depth = params.max_depth;
  tree.min_samples_leaf = params.min_samples_leaf.resolve(train.n());
  tree.min_samples_split = std::max<Index>(2, params.min_samples_split.resolve(train.n()));
  tree.n_features = train.d();

  std::vector<Index> rows(static_cast<std::size_t>(train.n()));
  std::iota(rows.begin(), rows.end(), Index{0});
  Builder{train.features, train.target, tree}.grow(std::move(rows), 0);
  return tree;
}

int cart_route(const RegressionTree& tree, std::span<const double> point) {
  if (static_cast<Index>(point.size()) != tree.n_features) throw Error("cart_route: dimension mismatch");
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    node = point[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].leaf_id;
}

int cart_route(const RegressionTree& tree, const Matrix& x, Index row) {
  if (x.cols() != tree.n_features) throw Error("cart_route: dimension mismatch");
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& nd = tree.nodes[static_cast<std::size_t>(node)];
    node = x(row, nd.feature) <= nd.threshold ? nd.left : nd.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].leaf_id;
}

Vector cart_predict(const RegressionTree& tree, const Matrix& x) {
  if (x.cols() != tree.n_features) throw Error("cart_predict: dimension mismatch");
  std::vector<double> leaf_value(tree.leaf_rows.size());
  for (const auto& nd : tree.nodes) {
    if (nd.feature < 0) leaf_value[static_cast<std::size_t>(nd.leaf_id)] = nd.value;
  }
  Vector out(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    out(i) = leaf_value[static_cast<std::size_t>(cart_route(tree, x, i))];
  }
  return out;
}

}  // namespace smoothreg
