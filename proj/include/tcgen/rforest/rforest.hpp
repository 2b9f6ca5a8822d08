#pragma once

#include <cstdint>
#include <vector>

#include "tcgen/common.hpp"

namespace tcgen::rforest {

struct ForestConfig {
  int n_trees = 500;
  int mtry = 3;       // features tried per split
  int min_node = 5;   // minimum leaf size
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Binary regression tree node. feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;          // leaf mean (set on all nodes for inspection)
  double var_reduction = 0.0;  // SSE_node - SSE_left - SSE_right at split nodes
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  double predict(const double* x) const;
};

struct Forest {
  ForestConfig cfg;
  int n_features = 0;
  std::vector<Tree> trees;
  double y_min = 0.0;
  double y_max = 0.0;
};

/// Fits a regression random forest by CART with variance-reduction splits.
/// X is n x p row-major. Deterministic given cfg.seed; trees are
/// independent given per-tree derived streams.
Forest fit_forest(const std::vector<double>& X, const std::vector<double>& y,
                  int n_features, const ForestConfig& cfg, int threads = 1);

/// Mean of per-tree leaf predictions.
double predict(const Forest& forest, const double* x);

/// Per-feature total variance reduction summed over all trees and nodes.
std::vector<double> variable_importance(const Forest& forest);

}  // namespace tcgen::rforest
