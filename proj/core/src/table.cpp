#include "treekernel/table.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace treekernel {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::string stem_of(const std::string& path) {
  const std::size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

void format_value(char* buf, std::size_t size, double v) {
  std::snprintf(buf, size, "%.17g", v);
}

}  // namespace

TabularDataset read_csv(std::istream& in, const std::string& source_name) {
  TabularDataset table;
  table.source_name = source_name;

  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument(source_name + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.column_names = split_line(line);
  const std::size_t width = table.column_names.size();

  std::vector<double> cells;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> parts = split_line(line);
    if (parts.size() != width) {
      throw std::invalid_argument(source_name + ": row " + std::to_string(rows + 2) +
                                  " has " + std::to_string(parts.size()) +
                                  " cells, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      double value = 0.0;
      if (!parse_double(parts[c], value)) {
        throw std::invalid_argument(source_name + ": column '" +
                                    table.column_names[c] + "' has non-numeric value '" +
                                    parts[c] + "' in row " + std::to_string(rows + 2));
      }
      cells.push_back(value);
    }
    ++rows;
  }
  if (rows == 0) {
    throw std::invalid_argument(source_name + ": no data rows");
  }

  table.values.resize(static_cast<Eigen::Index>(rows),
                      static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          cells[r * width + c];
    }
  }
  return table;
}

TabularDataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  return read_csv(in, stem_of(path));
}

int column_index(const TabularDataset& table, const std::string& name) {
  for (std::size_t i = 0; i < table.column_names.size(); ++i) {
    if (table.column_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

SplitColumns split_target(const TabularDataset& table,
                          const std::string& target_col) {
  const int target = column_index(table, target_col);
  if (target < 0) {
    throw std::invalid_argument(table.source_name + ": no column named '" +
                                target_col + "'");
  }
  if (table.num_columns() < 2) {
    throw std::invalid_argument(table.source_name + ": no feature columns");
  }

  SplitColumns out;
  out.target = table.values.col(target);
  out.features.resize(table.n(), table.num_columns() - 1);
  Eigen::Index dst = 0;
  for (int c = 0; c < table.num_columns(); ++c) {
    if (c == target) continue;
    out.features.col(dst++) = table.values.col(c);
    out.feature_names.push_back(table.column_names[static_cast<std::size_t>(c)]);
  }
  return out;
}

std::string matrix_csv_string(const Eigen::MatrixXd& m) {
  std::string out;
  char buf[48];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      format_value(buf, sizeof(buf), m(i, j));
      if (j > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << matrix_csv_string(m);
}

}  // namespace treekernel
