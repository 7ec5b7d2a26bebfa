#pragma once

#include <Eigen/Core>
#include <vector>

#include "treekernel/ensemble.hpp"

namespace treekernel {

enum class KernelTag { rf, gbt, laplace };

// Similarity matrix between two point sets; ensemble kernels hold
// co-membership frequencies in [0,1] and are symmetric with unit diagonal
// when both sides index the same points.
struct KernelMatrix {
  Eigen::MatrixXd values;
  KernelTag tag = KernelTag::rf;

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

// Binary leaf-membership encoding: column i is the indicator vector of the
// leaves row i falls into, one 1 per tree, stacked by tree with cumulative
// leaf offsets.
struct FeatureMap {
  Eigen::MatrixXd phi;            // P x n, P = total leaf count
  std::vector<int> tree_offsets;  // leaf-block offset per tree
};

FeatureMap feature_map(const Ensemble& e, const Eigen::MatrixXd& X);

// Entry (i, j) = (1/M) * #{m : leaf_m(A_i) == leaf_m(B_j)}; equals
// (1/M) * phi(A_i)^T phi(B_j) exactly.
KernelMatrix ensemble_kernel(const Ensemble& e, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B);
KernelMatrix ensemble_kernel(const Ensemble& e, const Eigen::MatrixXd& A);

// k(a, b) = exp(-||a - b||_1 / sigma); sigma must be positive.
KernelMatrix laplace_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            double sigma);

// Pearson correlation between the strict upper triangles of two square
// matrices of equal dimension n >= 3. Throws std::domain_error when either
// triangle has zero variance.
double mantel(const KernelMatrix& a, const KernelMatrix& b);

// True when the smallest eigenvalue is >= -tol. Input must be square and
// symmetric to 1e-10.
bool check_psd(const KernelMatrix& k, double tol = 1e-8);

}  // namespace treekernel
