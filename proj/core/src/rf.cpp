#include <numeric>
#include <stdexcept>

#include "treekernel/ensemble.hpp"
#include "treekernel/parallel.hpp"
#include "treekernel/random.hpp"

namespace treekernel {

Ensemble fit_rf(const Dataset& data, const RfParams& params, std::uint64_t seed,
                int threads) {
  validate(data);
  if (params.num_trees < 1) throw std::invalid_argument("num_trees must be >= 1");

  Ensemble e;
  e.kind = data.task == Task::regression ? EnsembleKind::rf_regression
                                         : EnsembleKind::rf_classification;
  e.num_features = data.p();
  e.rf_params = params;
  e.trees.resize(static_cast<std::size_t>(params.num_trees));

  const int n = data.n();
  parallel_for(0, params.num_trees, threads, [&](int m) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(m));
    if (params.bootstrap) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      std::vector<int> rows(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = pick(rng);
      const Dataset resample = subset(data, rows);
      e.trees[static_cast<std::size_t>(m)] = fit_tree(resample, params.tree, rng);
    } else {
      e.trees[static_cast<std::size_t>(m)] = fit_tree(data, params.tree, rng);
    }
  });
  return e;
}

double predict_rf(const Ensemble& e, const Eigen::VectorXd& x) {
  if (!e.is_rf()) throw std::invalid_argument("predict_rf needs an rf ensemble");
  if (e.kind == EnsembleKind::rf_regression) {
    double sum = 0.0;
    for (const Tree& tree : e.trees) sum += predict_tree(tree, x);
    return sum / static_cast<double>(e.num_trees());
  }
  // majority vote over per-tree class-1 fractions thresholded at 0.5
  int votes = 0;
  for (const Tree& tree : e.trees) {
    if (predict_tree(tree, x) > 0.5) ++votes;
  }
  return 2 * votes > e.num_trees() ? 1.0 : 0.0;
}

int predict_class(const Ensemble& e, const Eigen::VectorXd& x) {
  if (!e.is_classification()) {
    throw std::invalid_argument("predict_class needs a classification ensemble");
  }
  if (e.kind == EnsembleKind::rf_classification) {
    return static_cast<int>(predict_rf(e, x));
  }
  return predict_gbt(e, x) > 0.0 ? 1 : 0;  // sigmoid(score) > 0.5
}

Eigen::MatrixXi leaf_assignments(const Ensemble& e, const Eigen::MatrixXd& X) {
  if (X.cols() != e.num_features) {
    throw std::invalid_argument("input dimension does not match the ensemble");
  }
  Eigen::MatrixXi out(X.rows(), e.num_trees());
  for (int m = 0; m < e.num_trees(); ++m) {
    const Tree& tree = e.trees[static_cast<std::size_t>(m)];
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      out(i, m) = leaf_index(tree, X, static_cast<int>(i));
    }
  }
  return out;
}

Eigen::VectorXd predict_batch(const Ensemble& e, const Eigen::MatrixXd& X) {
  if (X.cols() != e.num_features) {
    throw std::invalid_argument("input dimension does not match the ensemble");
  }
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd x = X.row(i);
    out[i] = e.is_rf() ? predict_rf(e, x) : predict_gbt(e, x);
  }
  return out;
}

}  // namespace treekernel
