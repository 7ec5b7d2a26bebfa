#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "treekernel/ensemble.hpp"

namespace treekernel {
namespace {

constexpr double kPrevalenceClamp = 1e-12;

// Greedy second-order tree growth; leaves store the unshrunk weight
// -G/(H + lambda_w).
class XgbTreeBuilder {
 public:
  XgbTreeBuilder(const Eigen::MatrixXd& X, const std::vector<double>& grad,
                 const std::vector<double>& hess, const GbtParams& params)
      : X_(X), grad_(grad), hess_(hess), params_(params) {
    all_features_.resize(static_cast<std::size_t>(X.cols()));
    std::iota(all_features_.begin(), all_features_.end(), 0);
  }

  Tree build() {
    Tree tree;
    tree.num_features = static_cast<int>(X_.cols());
    std::vector<int> rows(static_cast<std::size_t>(X_.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    build_node(tree, rows, 0);
    return tree;
  }

 private:
  int make_leaf(Tree& tree, const std::vector<int>& rows) {
    double g = 0.0;
    double h = 0.0;
    for (int r : rows) {
      g += grad_[static_cast<std::size_t>(r)];
      h += hess_[static_cast<std::size_t>(r)];
    }
    Tree::Node node;
    node.leaf_id = tree.num_leaves++;
    node.value = -g / (h + params_.lambda_w);
    node.count = static_cast<int>(rows.size());
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build_node(Tree& tree, const std::vector<int>& rows, int depth) {
    if (depth >= params_.max_depth || rows.size() < 2) {
      return make_leaf(tree, rows);
    }
    const auto split = best_split_xgb(rows, X_, all_features_, grad_, hess_,
                                      params_.lambda_w, params_.gamma, 1);
    if (!split) return make_leaf(tree, rows);

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (int r : rows) {
      if (X_(r, split->feature) <= split->threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }

    const int index = static_cast<int>(tree.nodes.size());
    Tree::Node node;
    node.feature = split->feature;
    node.threshold = split->threshold;
    tree.nodes.push_back(node);
    const int left = build_node(tree, left_rows, depth + 1);
    const int right = build_node(tree, right_rows, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  const Eigen::MatrixXd& X_;
  const std::vector<double>& grad_;
  const std::vector<double>& hess_;
  const GbtParams& params_;
  std::vector<int> all_features_;
};

double resolve_base_score(const Dataset& data, const GbtParams& params) {
  if (std::isfinite(params.base_score)) return params.base_score;
  if (params.loss == GbtLoss::squared_error) return 0.5;
  double prevalence = data.target.mean();
  prevalence = std::clamp(prevalence, kPrevalenceClamp, 1.0 - kPrevalenceClamp);
  return std::log(prevalence / (1.0 - prevalence));
}

}  // namespace

Ensemble fit_gbt(const Dataset& data, const GbtParams& params, std::uint64_t) {
  validate(data);
  if (params.rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (params.eta < 0.0 || params.eta > 1.0) {
    throw std::invalid_argument("eta must lie in [0, 1]");
  }
  if (params.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (params.gamma < 0.0 || params.lambda_w < 0.0) {
    throw std::invalid_argument("gamma and lambda_w must be >= 0");
  }
  const bool logistic = params.loss == GbtLoss::logistic;
  if (logistic != (data.task == Task::classification)) {
    throw std::invalid_argument(
        "squared_error pairs with regression targets, logistic with 0/1 targets");
  }

  Ensemble e;
  e.kind = logistic ? EnsembleKind::gbt_classification : EnsembleKind::gbt_regression;
  e.num_features = data.p();
  e.eta = params.eta;
  e.base_score = resolve_base_score(data, params);
  e.gbt_params = params;
  e.gbt_params.base_score = e.base_score;
  e.trees.reserve(static_cast<std::size_t>(params.rounds));

  const int n = data.n();
  std::vector<double> score(static_cast<std::size_t>(n), e.base_score);
  std::vector<double> grad(static_cast<std::size_t>(n));
  std::vector<double> hess(static_cast<std::size_t>(n));

  for (int round = 0; round < params.rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      const double y = data.target[i];
      if (logistic) {
        const double p = sigmoid(score[static_cast<std::size_t>(i)]);
        grad[static_cast<std::size_t>(i)] = p - y;
        hess[static_cast<std::size_t>(i)] = p * (1.0 - p);
      } else {
        grad[static_cast<std::size_t>(i)] = score[static_cast<std::size_t>(i)] - y;
        hess[static_cast<std::size_t>(i)] = 1.0;
      }
    }
    Tree tree = XgbTreeBuilder(data.features, grad, hess, params).build();
    for (int i = 0; i < n; ++i) {
      score[static_cast<std::size_t>(i)] +=
          params.eta * predict_tree(tree, data.features, i);
    }
    e.trees.push_back(std::move(tree));
  }
  return e;
}

double predict_gbt(const Ensemble& e, const Eigen::VectorXd& x) {
  if (e.is_rf()) throw std::invalid_argument("predict_gbt needs a gbt ensemble");
  double sum = 0.0;
  for (const Tree& tree : e.trees) sum += predict_tree(tree, x);
  return e.base_score + e.eta * sum;
}

}  // namespace treekernel
