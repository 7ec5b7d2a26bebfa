#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "treekernel/tree.hpp"

namespace treekernel {

enum class EnsembleKind {
  rf_regression,
  rf_classification,
  gbt_regression,
  gbt_classification
};

enum class GbtLoss { squared_error, logistic };

struct RfParams {
  int num_trees = 500;
  TreeParams tree;
  bool bootstrap = true;
};

struct GbtParams {
  int rounds = 100;
  double eta = 0.3;  // in [0, 1]
  int max_depth = 6;
  double gamma = 0.0;
  double lambda_w = 1.0;
  // NaN resolves at fit time: 0.5 raw for squared error, log-odds of the
  // training prevalence for logistic.
  double base_score = std::numeric_limits<double>::quiet_NaN();
  GbtLoss loss = GbtLoss::squared_error;
};

struct Ensemble {
  EnsembleKind kind = EnsembleKind::rf_regression;
  std::vector<Tree> trees;
  int num_features = 0;
  double eta = 1.0;         // applied to leaf weights at prediction (gbt)
  double base_score = 0.0;  // raw offset (gbt)
  RfParams rf_params;       // snapshot, rf kinds
  GbtParams gbt_params;     // snapshot, gbt kinds

  int num_trees() const { return static_cast<int>(trees.size()); }
  bool is_rf() const {
    return kind == EnsembleKind::rf_regression ||
           kind == EnsembleKind::rf_classification;
  }
  bool is_classification() const {
    return kind == EnsembleKind::rf_classification ||
           kind == EnsembleKind::gbt_classification;
  }
};

// Bagged forest; tree m is grown on its own n-draw bootstrap resample with
// an rng stream derived from (seed, m), so parallel and serial fits agree.
Ensemble fit_rf(const Dataset& data, const RfParams& params, std::uint64_t seed,
                int threads = 1);

// Regression: mean of tree predictions. Classification: majority vote over
// per-tree class-1 fractions thresholded at 0.5 (ties resolve to class 0).
double predict_rf(const Ensemble& e, const Eigen::VectorXd& x);

// Boosted trees under the second-order objective; rounds run sequentially
// and the running score updates by eta times the fitted leaf weight. The
// seed parameter is accepted for interface parity but unused: no row or
// column subsampling is performed.
Ensemble fit_gbt(const Dataset& data, const GbtParams& params,
                 std::uint64_t seed = 0);

// Raw additive score base_score + eta * sum of leaf weights.
double predict_gbt(const Ensemble& e, const Eigen::VectorXd& x);

inline double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Class label in {0,1} for classification ensembles of either family.
int predict_class(const Ensemble& e, const Eigen::VectorXd& x);

// Entry (i, m) is leaf_index(tree m, row i of X).
Eigen::MatrixXi leaf_assignments(const Ensemble& e, const Eigen::MatrixXd& X);

// Row-wise predict_rf / predict_gbt.
Eigen::VectorXd predict_batch(const Ensemble& e, const Eigen::MatrixXd& X);

}  // namespace treekernel
