#pragma once

#include <Eigen/Core>
#include <vector>

namespace treekernel {

enum class Task { regression, classification };

// Supervised training set. Classification targets must be 0/1; no missing
// values anywhere.
struct Dataset {
  Eigen::MatrixXd features;  // n x p
  Eigen::VectorXd target;    // length n
  Task task = Task::regression;

  int n() const { return static_cast<int>(features.rows()); }
  int p() const { return static_cast<int>(features.cols()); }
};

// Throws std::invalid_argument when the invariants above are violated.
void validate(const Dataset& data);

// Row-selected copy; rows may repeat (bootstrap resamples).
Dataset subset(const Dataset& data, const std::vector<int>& rows);

}  // namespace treekernel
