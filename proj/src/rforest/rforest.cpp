#include "tcgen/rforest/rforest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tcgen/parallel.hpp"
#include "tcgen/rng.hpp"

namespace tcgen::rforest {

void ForestConfig::validate() const {
  if (n_trees < 1) throw InputError("ForestConfig: n_trees must be >= 1");
  if (mtry < 1) throw InputError("ForestConfig: mtry must be >= 1");
  if (min_node < 1) throw InputError("ForestConfig: min_node must be >= 1");
}

double Tree::predict(const double* x) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].value;
}

namespace {

struct Builder {
  const std::vector<double>& X;
  const std::vector<double>& y;
  int p;
  const ForestConfig& cfg;
  Tree& tree;
  Rng& rng;
  std::vector<int> feat_pool;

  double xval(int row, int f) const { return X[static_cast<std::size_t>(row) * p + f]; }

  // rows[lo, hi) is the node's sample (bootstrap indices, may repeat).
  int build(std::vector<int>& rows, int lo, int hi) {
    const int n = hi - lo;
    double sum = 0.0, sum2 = 0.0;
    for (int i = lo; i < hi; ++i) {
      sum += y[rows[i]];
      sum2 += y[rows[i]] * y[rows[i]];
    }
    const double mean = sum / n;
    const double sse = sum2 - sum * sum / n;

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = mean;

    if (n < 2 * cfg.min_node || sse <= 1e-12 * std::max(1.0, sum2)) {
      return node_id;  // leaf
    }

    // Sample mtry features without replacement (partial Fisher-Yates).
    const int mtry = std::min(cfg.mtry, p);
    for (int i = 0; i < mtry; ++i) {
      const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(p - i)));
      std::swap(feat_pool[i], feat_pool[j]);
    }

    int best_f = -1;
    double best_gain = 0.0, best_thresh = 0.0;
    std::vector<int> order(rows.begin() + lo, rows.begin() + hi);
    for (int fi = 0; fi < mtry; ++fi) {
      const int f = feat_pool[fi];
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double xa = xval(a, f), xb = xval(b, f);
        return xa != xb ? xa < xb : a < b;
      });
      double sl = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        sl += y[order[i]];
        const int nl = i + 1, nr = n - nl;
        if (nl < cfg.min_node || nr < cfg.min_node) continue;
        const double xa = xval(order[i], f), xb = xval(order[i + 1], f);
        if (xa == xb) continue;  // threshold must separate distinct values
        const double sr = sum - sl;
        const double gain = sl * sl / nl + sr * sr / nr - sum * sum / n;
        if (gain > best_gain) {
          best_gain = gain;
          best_f = f;
          best_thresh = 0.5 * (xa + xb);
        }
      }
    }
    if (best_f < 0) return node_id;  // no admissible split

    const auto mid = std::partition(rows.begin() + lo, rows.begin() + hi, [&](int r) {
      return xval(r, best_f) <= best_thresh;
    });
    const int split = static_cast<int>(mid - rows.begin());

    tree.nodes[node_id].feature = best_f;
    tree.nodes[node_id].threshold = best_thresh;
    tree.nodes[node_id].var_reduction = best_gain;
    const int left = build(rows, lo, split);
    tree.nodes[node_id].left = left;
    const int right = build(rows, split, hi);
    tree.nodes[node_id].right = right;
    return node_id;
  }
};

}  // namespace

Forest fit_forest(const std::vector<double>& X, const std::vector<double>& y,
                  int n_features, const ForestConfig& cfg, int threads) {
  cfg.validate();
  const int n = static_cast<int>(y.size());
  if (n_features < 1) throw InputError("fit_forest: n_features must be >= 1");
  if (X.size() != static_cast<std::size_t>(n) * n_features) {
    throw InputError("fit_forest: X shape mismatch");
  }
  if (n < 2 * cfg.min_node) throw InputError("fit_forest: need at least 2*min_node rows");
  for (double v : X) {
    if (!std::isfinite(v)) throw InputError("fit_forest: non-finite predictor");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw InputError("fit_forest: non-finite response");
  }

  Forest forest;
  forest.cfg = cfg;
  forest.n_features = n_features;
  forest.trees.resize(cfg.n_trees);
  forest.y_min = *std::min_element(y.begin(), y.end());
  forest.y_max = *std::max_element(y.begin(), y.end());

  parallel_for(static_cast<std::size_t>(cfg.n_trees), threads, [&](std::size_t ti) {
    Rng rng = Rng::derive(cfg.seed, "tree", ti);
    std::vector<int> rows(n);
    if (cfg.bootstrap) {
      for (int i = 0; i < n; ++i) {
        rows[i] = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    Tree& tree = forest.trees[ti];
    tree.nodes.reserve(2 * static_cast<std::size_t>(n) / cfg.min_node + 1);
    Builder b{X, y, n_features, cfg, tree, rng, {}};
    b.feat_pool.resize(n_features);
    std::iota(b.feat_pool.begin(), b.feat_pool.end(), 0);
    b.build(rows, 0, n);
  });
  return forest;
}

double predict(const Forest& forest, const double* x) {
  double acc = 0.0;
  for (const Tree& t : forest.trees) acc += t.predict(x);
  return acc / static_cast<double>(forest.trees.size());
}

std::vector<double> variable_importance(const Forest& forest) {
  std::vector<double> imp(forest.n_features, 0.0);
  for (const Tree& t : forest.trees) {
    for (const TreeNode& node : t.nodes) {
      if (node.feature >= 0) imp[node.feature] += node.var_reduction;
    }
  }
  return imp;
}

}  // namespace tcgen::rforest
