#pragma once

#include <Eigen/Core>

#include "treekernel/dataset.hpp"
#include "treekernel/kernel.hpp"

namespace treekernel {

struct KrrModel {
  Eigen::VectorXd alpha;
  double lambda = 0.0;
  Eigen::VectorXd train_targets;  // raw for regression, -1/+1 for classification
  Task task = Task::regression;
};

// Smallest lambda on the ladder {0} u {1e-12 * 10^k : k = 0..14} for which
// the Cholesky factorization of K + lambda*I succeeds. Throws
// std::runtime_error when the whole ladder fails.
double select_lambda(const KernelMatrix& K);

// Solves (K + lambda*I) alpha = y by Cholesky factorization with iterative
// refinement; never forms an explicit inverse. Throws on a non-positive-
// definite system.
KrrModel fit_krr(const KernelMatrix& K, const Eigen::VectorXd& y, double lambda,
                 Task task = Task::regression);

// alpha . k_vec where k_vec holds the kernel values between the query point
// and the training points.
double predict_krr(const KrrModel& model, const Eigen::VectorXd& k_vec);

// 1 iff the score is strictly positive (a zero score maps to class 0).
int classify_krr(const KrrModel& model, const Eigen::VectorXd& k_vec);

// One query per row of K_cross (n_query x n_train).
Eigen::VectorXd predict_krr_batch(const KrrModel& model,
                                  const Eigen::MatrixXd& K_cross);

}  // namespace treekernel
