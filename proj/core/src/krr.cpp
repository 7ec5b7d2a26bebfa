#include "treekernel/krr.hpp"

#include <Eigen/Cholesky>
#include <array>
#include <cmath>
#include <stdexcept>

namespace treekernel {
namespace {

constexpr double kResidualTol = 1e-8;

std::vector<double> lambda_ladder() {
  std::vector<double> ladder{0.0};
  for (int k = 0; k <= 14; ++k) {
    ladder.push_back(1e-12 * std::pow(10.0, k));
  }
  return ladder;
}

void require_square_symmetric(const KernelMatrix& K) {
  if (K.values.rows() != K.values.cols()) {
    throw std::invalid_argument("kernel matrix must be square");
  }
  const double asym = (K.values - K.values.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw std::invalid_argument("kernel matrix must be symmetric");
  }
}

}  // namespace

double select_lambda(const KernelMatrix& K) {
  require_square_symmetric(K);
  const Eigen::Index n = K.values.rows();
  Eigen::MatrixXd shifted(n, n);
  for (double lambda : lambda_ladder()) {
    shifted = K.values;
    shifted.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success) return lambda;
  }
  throw std::runtime_error("degenerate kernel: no ladder value factorizes");
}

KrrModel fit_krr(const KernelMatrix& K, const Eigen::VectorXd& y, double lambda,
                 Task task) {
  require_square_symmetric(K);
  if (K.values.rows() != y.size()) {
    throw std::invalid_argument("kernel dimension does not match target length");
  }
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");

  Eigen::MatrixXd system = K.values;
  system.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("K + lambda*I is not positive definite; raise lambda");
  }

  Eigen::VectorXd alpha = llt.solve(y);
  // refinement passes tighten the residual on ill-conditioned systems
  const double y_norm = y.norm();
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::VectorXd residual = y - system * alpha;
    if (residual.norm() <= kResidualTol * y_norm) break;
    alpha += llt.solve(residual);
  }

  KrrModel model;
  model.alpha = std::move(alpha);
  model.lambda = lambda;
  model.train_targets = y;
  model.task = task;
  return model;
}

double predict_krr(const KrrModel& model, const Eigen::VectorXd& k_vec) {
  if (k_vec.size() != model.alpha.size()) {
    throw std::invalid_argument("kernel vector length does not match model size");
  }
  return model.alpha.dot(k_vec);
}

int classify_krr(const KrrModel& model, const Eigen::VectorXd& k_vec) {
  if (model.task != Task::classification) {
    throw std::invalid_argument("classify_krr needs a classification model");
  }
  return predict_krr(model, k_vec) > 0.0 ? 1 : 0;
}

Eigen::VectorXd predict_krr_batch(const KrrModel& model,
                                  const Eigen::MatrixXd& K_cross) {
  if (K_cross.cols() != model.alpha.size()) {
    throw std::invalid_argument("cross-kernel width does not match model size");
  }
  return K_cross * model.alpha;
}

}  // namespace treekernel
