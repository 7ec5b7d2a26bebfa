#include "treekernel/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace treekernel {
namespace {

KernelTag tag_of(const Ensemble& e) {
  return e.is_rf() ? KernelTag::rf : KernelTag::gbt;
}

// Shared counting core: co-membership counts per (row of A, row of B),
// accumulated tree by tree in index order.
Eigen::MatrixXd count_kernel(const Ensemble& e, const Eigen::MatrixXi& la,
                             const Eigen::MatrixXi& lb) {
  const Eigen::Index na = la.rows();
  const Eigen::Index nb = lb.rows();
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(na, nb);
  std::vector<std::vector<int>> buckets;
  for (int m = 0; m < e.num_trees(); ++m) {
    const int num_leaves = e.trees[static_cast<std::size_t>(m)].num_leaves;
    buckets.assign(static_cast<std::size_t>(num_leaves), {});
    for (Eigen::Index j = 0; j < nb; ++j) {
      buckets[static_cast<std::size_t>(lb(j, m))].push_back(static_cast<int>(j));
    }
    for (Eigen::Index i = 0; i < na; ++i) {
      for (int j : buckets[static_cast<std::size_t>(la(i, m))]) {
        ++counts(i, j);
      }
    }
  }
  return counts.cast<double>() / static_cast<double>(e.num_trees());
}

}  // namespace

FeatureMap feature_map(const Ensemble& e, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXi leaves = leaf_assignments(e, X);
  FeatureMap map;
  map.tree_offsets.resize(static_cast<std::size_t>(e.num_trees()));
  int total = 0;
  for (int m = 0; m < e.num_trees(); ++m) {
    map.tree_offsets[static_cast<std::size_t>(m)] = total;
    total += e.trees[static_cast<std::size_t>(m)].num_leaves;
  }
  map.phi = Eigen::MatrixXd::Zero(total, X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int m = 0; m < e.num_trees(); ++m) {
      map.phi(map.tree_offsets[static_cast<std::size_t>(m)] + leaves(i, m), i) = 1.0;
    }
  }
  return map;
}

KernelMatrix ensemble_kernel(const Ensemble& e, const Eigen::MatrixXd& A,
                             const Eigen::MatrixXd& B) {
  const Eigen::MatrixXi la = leaf_assignments(e, A);
  const Eigen::MatrixXi lb = leaf_assignments(e, B);
  return {count_kernel(e, la, lb), tag_of(e)};
}

KernelMatrix ensemble_kernel(const Ensemble& e, const Eigen::MatrixXd& A) {
  const Eigen::MatrixXi la = leaf_assignments(e, A);
  return {count_kernel(e, la, la), tag_of(e)};
}

KernelMatrix laplace_kernel(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                            double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (A.cols() != B.cols()) {
    throw std::invalid_argument("laplace_kernel inputs need equal dimension");
  }
  Eigen::MatrixXd values(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      values(i, j) = std::exp(-(A.row(i) - B.row(j)).cwiseAbs().sum() / sigma);
    }
  }
  return {std::move(values), KernelTag::laplace};
}

double mantel(const KernelMatrix& a, const KernelMatrix& b) {
  const Eigen::Index n = a.values.rows();
  if (a.values.cols() != n || b.values.rows() != n || b.values.cols() != n) {
    throw std::invalid_argument("mantel needs square matrices of equal dimension");
  }
  if (n < 3) throw std::invalid_argument("mantel needs dimension >= 3");

  const Eigen::Index pairs = n * (n - 1) / 2;
  Eigen::VectorXd ua(pairs);
  Eigen::VectorXd ub(pairs);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      ua[k] = a.values(i, j);
      ub[k] = b.values(i, j);
    }
  }
  const double mean_a = ua.mean();
  const double mean_b = ub.mean();
  ua.array() -= mean_a;
  ub.array() -= mean_b;
  // rounding can leave ~eps residue on a constant triangle
  const double floor_a =
      1e-12 * std::sqrt(static_cast<double>(pairs)) * (1.0 + std::abs(mean_a));
  const double floor_b =
      1e-12 * std::sqrt(static_cast<double>(pairs)) * (1.0 + std::abs(mean_b));
  if (ua.norm() <= floor_a || ub.norm() <= floor_b) {
    throw std::domain_error("mantel undefined: constant upper triangle");
  }
  return std::clamp(ua.dot(ub) / (ua.norm() * ub.norm()), -1.0, 1.0);
}

bool check_psd(const KernelMatrix& k, double tol) {
  const Eigen::Index n = k.values.rows();
  if (k.values.cols() != n) throw std::invalid_argument("check_psd needs a square matrix");
  const double asym = (k.values - k.values.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw std::invalid_argument("check_psd needs a symmetric matrix");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      k.values, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -tol;
}

}  // namespace treekernel
