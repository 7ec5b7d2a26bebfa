#include "treekernel/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace treekernel {
namespace {

using json = nlohmann::json;

constexpr int kFormatVersion = 1;

const char* kind_token(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::rf_regression: return "rf_regression";
    case EnsembleKind::rf_classification: return "rf_classification";
    case EnsembleKind::gbt_regression: return "gbt_regression";
    case EnsembleKind::gbt_classification: return "gbt_classification";
  }
  return "?";
}

EnsembleKind kind_from_token(const std::string& token) {
  for (EnsembleKind kind :
       {EnsembleKind::rf_regression, EnsembleKind::rf_classification,
        EnsembleKind::gbt_regression, EnsembleKind::gbt_classification}) {
    if (token == kind_token(kind)) return kind;
  }
  throw std::invalid_argument("unknown ensemble kind: " + token);
}

json tree_to_json(const Tree& tree) {
  json node_list = json::array();
  for (const Tree::Node& node : tree.nodes) {
    node_list.push_back({{"feature", node.feature},
                         {"threshold", node.threshold},
                         {"left", node.left},
                         {"right", node.right},
                         {"leaf_id", node.leaf_id},
                         {"value", node.value},
                         {"count", node.count}});
  }
  return {{"num_leaves", tree.num_leaves},
          {"num_features", tree.num_features},
          {"nodes", std::move(node_list)}};
}

Tree tree_from_json(const json& doc) {
  Tree tree;
  tree.num_leaves = doc.at("num_leaves").get<int>();
  tree.num_features = doc.at("num_features").get<int>();
  for (const json& item : doc.at("nodes")) {
    Tree::Node node;
    node.feature = item.at("feature").get<int>();
    node.threshold = item.at("threshold").get<double>();
    node.left = item.at("left").get<int>();
    node.right = item.at("right").get<int>();
    node.leaf_id = item.at("leaf_id").get<int>();
    node.value = item.at("value").get<double>();
    node.count = item.at("count").get<int>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw std::invalid_argument("tree without nodes");
  return tree;
}

}  // namespace

std::string model_to_json(const ModelFile& model) {
  const Ensemble& e = model.ensemble;
  json params;
  if (e.is_rf()) {
    params = {{"num_trees", e.rf_params.num_trees},
              {"bootstrap", e.rf_params.bootstrap},
              {"min_node_size", e.rf_params.tree.min_node_size},
              {"mtry", e.rf_params.tree.mtry},
              {"criterion",
               e.rf_params.tree.criterion == SplitRule::variance ? "variance" : "gini"}};
    if (e.rf_params.tree.max_depth) params["max_depth"] = *e.rf_params.tree.max_depth;
  } else {
    params = {{"rounds", e.gbt_params.rounds},
              {"eta", e.gbt_params.eta},
              {"max_depth", e.gbt_params.max_depth},
              {"gamma", e.gbt_params.gamma},
              {"lambda_w", e.gbt_params.lambda_w},
              {"loss", e.gbt_params.loss == GbtLoss::squared_error ? "squared_error"
                                                                   : "logistic"}};
  }

  json trees = json::array();
  for (const Tree& tree : e.trees) trees.push_back(tree_to_json(tree));

  json doc = {{"format", "treekernel-model"},
              {"version", kFormatVersion},
              {"kind", kind_token(e.kind)},
              {"num_features", e.num_features},
              {"eta", e.eta},
              {"base_score", e.base_score},
              {"params", std::move(params)},
              {"feature_names", model.feature_names},
              {"target_col", model.target_col},
              {"trees", std::move(trees)}};
  return doc.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("format").get<std::string>() != "treekernel-model") {
    throw std::invalid_argument("not a treekernel model file");
  }
  if (doc.at("version").get<int>() != kFormatVersion) {
    throw std::invalid_argument("unsupported model version");
  }

  ModelFile model;
  Ensemble& e = model.ensemble;
  e.kind = kind_from_token(doc.at("kind").get<std::string>());
  e.num_features = doc.at("num_features").get<int>();
  e.eta = doc.at("eta").get<double>();
  e.base_score = doc.at("base_score").get<double>();

  const json& params = doc.at("params");
  if (e.is_rf()) {
    e.rf_params.num_trees = params.at("num_trees").get<int>();
    e.rf_params.bootstrap = params.at("bootstrap").get<bool>();
    e.rf_params.tree.min_node_size = params.at("min_node_size").get<int>();
    e.rf_params.tree.mtry = params.at("mtry").get<int>();
    e.rf_params.tree.criterion =
        params.at("criterion").get<std::string>() == "variance" ? SplitRule::variance
                                                                : SplitRule::gini;
    if (params.contains("max_depth")) {
      e.rf_params.tree.max_depth = params.at("max_depth").get<int>();
    }
  } else {
    e.gbt_params.rounds = params.at("rounds").get<int>();
    e.gbt_params.eta = params.at("eta").get<double>();
    e.gbt_params.max_depth = params.at("max_depth").get<int>();
    e.gbt_params.gamma = params.at("gamma").get<double>();
    e.gbt_params.lambda_w = params.at("lambda_w").get<double>();
    e.gbt_params.loss = params.at("loss").get<std::string>() == "squared_error"
                            ? GbtLoss::squared_error
                            : GbtLoss::logistic;
    e.gbt_params.base_score = e.base_score;
  }

  for (const json& item : doc.at("trees")) {
    e.trees.push_back(tree_from_json(item));
  }
  model.feature_names =
      doc.at("feature_names").get<std::vector<std::string>>();
  model.target_col = doc.at("target_col").get<std::string>();
  return model;
}

void save_model(const ModelFile& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(model);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return model_from_json(text);
}

}  // namespace treekernel
