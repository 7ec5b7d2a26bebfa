#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace treekernel {

// Parsed numeric CSV: first row is the header, comma delimited, no quoting.
struct TabularDataset {
  std::vector<std::string> column_names;
  Eigen::MatrixXd values;  // n x #columns
  std::string source_name;

  int n() const { return static_cast<int>(values.rows()); }
  int num_columns() const { return static_cast<int>(values.cols()); }
};

TabularDataset read_csv(const std::string& path);
TabularDataset read_csv(std::istream& in, const std::string& source_name);

// -1 when absent.
int column_index(const TabularDataset& table, const std::string& name);

struct SplitColumns {
  Eigen::MatrixXd features;  // non-target columns in file order
  Eigen::VectorXd target;
  std::vector<std::string> feature_names;
};

// Throws std::invalid_argument when the target column is missing or the
// table has no feature columns left.
SplitColumns split_target(const TabularDataset& table,
                          const std::string& target_col);

// Matrix CSV without header, `%.17g` per entry.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
std::string matrix_csv_string(const Eigen::MatrixXd& m);

}  // namespace treekernel
