#include "treekernel/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace treekernel {

void validate(const Dataset& data) {
  if (data.features.rows() < 1 || data.features.cols() < 1) {
    throw std::invalid_argument("dataset needs at least one row and one feature");
  }
  if (data.target.size() != data.features.rows()) {
    throw std::invalid_argument("target length does not match feature rows");
  }
  if (!data.features.allFinite() || !data.target.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite values");
  }
  if (data.task == Task::classification) {
    for (int i = 0; i < data.n(); ++i) {
      const double y = data.target[i];
      if (y != 0.0 && y != 1.0) {
        throw std::invalid_argument("classification targets must be 0 or 1");
      }
    }
  }
}

Dataset subset(const Dataset& data, const std::vector<int>& rows) {
  Dataset out;
  out.task = data.task;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.target.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.target[static_cast<Eigen::Index>(i)] = data.target[rows[i]];
  }
  return out;
}

}  // namespace treekernel
