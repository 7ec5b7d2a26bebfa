#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "treekernel/dataset.hpp"

namespace treekernel {

enum class SplitRule { variance, gini, xgb_gain };

struct TreeParams {
  int min_node_size = 5;
  std::optional<int> max_depth;  // unlimited when empty
  int mtry = 0;                  // 0 resolves to max(1, floor(sqrt(p)))
  SplitRule criterion = SplitRule::variance;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Binary decision tree with axis-aligned splits; routing is x[feature] <=
// threshold -> left. Nodes live in a flat array with the root at index 0,
// leaves carry ids dense in [0, num_leaves) assigned in depth-first order.
struct Tree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_id = -1;
    double value = 0.0;  // mean target / class-1 fraction / additive weight
    int count = 0;       // fitting rows routed here (leaves only)
  };

  std::vector<Node> nodes;
  int num_leaves = 0;
  int num_features = 0;

  int depth() const;  // 0 for a single-leaf tree
};

// Exhaustive scan over the candidate features and the midpoints between
// consecutive distinct sorted values. Returns none when the node is pure or
// no split leaves min_node_size rows on each side; otherwise the best split
// by criterion gain, ties resolved to the lowest feature index and then the
// lowest threshold. Gain is reported relative to the parent impurity.
std::optional<SplitCandidate> best_split(std::span<const int> rows,
                                         const Dataset& data,
                                         std::span<const int> candidate_features,
                                         SplitRule rule, int min_node_size = 1);

// Second-order scan for boosted trees: gain is
//   0.5*(GL^2/(HL+lambda_w) + GR^2/(HR+lambda_w) - GP^2/(HP+lambda_w)) - gamma
// over per-row gradient/hessian sums, and only strictly positive gains split.
std::optional<SplitCandidate> best_split_xgb(std::span<const int> rows,
                                             const Eigen::MatrixXd& features,
                                             std::span<const int> candidate_features,
                                             std::span<const double> grad,
                                             std::span<const double> hess,
                                             double lambda_w, double gamma,
                                             int min_node_size = 1);

// CART fit (variance or gini criterion). At each node mtry candidate
// features are drawn without replacement from rng; recursion stops on pure
// nodes, exhausted depth, nodes too small for two legal children, or an
// empty split scan.
Tree fit_tree(const Dataset& data, const TreeParams& params,
              std::mt19937_64& rng);

double predict_tree(const Tree& tree, const Eigen::VectorXd& x);
int leaf_index(const Tree& tree, const Eigen::VectorXd& x);

// Zero-copy row variants used by batch operations.
double predict_tree(const Tree& tree, const Eigen::MatrixXd& X, int row);
int leaf_index(const Tree& tree, const Eigen::MatrixXd& X, int row);

}  // namespace treekernel
