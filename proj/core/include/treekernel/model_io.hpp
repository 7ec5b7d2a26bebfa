#pragma once

#include <string>
#include <vector>

#include "treekernel/ensemble.hpp"

namespace treekernel {

// On-disk model document: the ensemble plus the column names it was fitted
// on, so `kernel` can select the right CSV columns later.
struct ModelFile {
  Ensemble ensemble;
  std::vector<std::string> feature_names;
  std::string target_col;
};

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace treekernel
