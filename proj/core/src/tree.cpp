#include "treekernel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace treekernel {
namespace {

struct ValueRow {
  double value;
  int row;
};

// Sufficient statistics for the mean-based criteria. For 0/1 targets the sum
// doubles as the class-1 count.
struct MeanStats {
  double sum = 0.0;
  int count = 0;
};

// SSE reduction written as sum_L^2/n_L + sum_R^2/n_R - sum_P^2/n_P, which is
// algebraically parent SSE minus child SSE.
double variance_gain(const MeanStats& parent, const MeanStats& left) {
  const double right_sum = parent.sum - left.sum;
  const int right_count = parent.count - left.count;
  return left.sum * left.sum / left.count + right_sum * right_sum / right_count -
         parent.sum * parent.sum / parent.count;
}

double gini_impurity(const MeanStats& s) {
  const double p = s.sum / s.count;
  return 2.0 * p * (1.0 - p);
}

double gini_gain(const MeanStats& parent, const MeanStats& left) {
  MeanStats right{parent.sum - left.sum, parent.count - left.count};
  const double wl = static_cast<double>(left.count) / parent.count;
  const double wr = static_cast<double>(right.count) / parent.count;
  return gini_impurity(parent) - wl * gini_impurity(left) - wr * gini_impurity(right);
}

struct GradStats {
  double g = 0.0;
  double h = 0.0;
  int count = 0;
};

double structure_score(double g, double h, double lambda_w) {
  return g * g / (h + lambda_w);
}

double xgb_gain(const GradStats& parent, const GradStats& left, double lambda_w,
                double gamma) {
  const double gr = parent.g - left.g;
  const double hr = parent.h - left.h;
  return 0.5 * (structure_score(left.g, left.h, lambda_w) +
                structure_score(gr, hr, lambda_w) -
                structure_score(parent.g, parent.h, lambda_w)) -
         gamma;
}

double midpoint(double a, double b) { return a + 0.5 * (b - a); }

// Sweep one feature's sorted values; better(gain) keeps the running best so
// equal gains resolve to the lowest feature then the lowest threshold.
template <typename Stats, typename AddRow, typename GainFn>
void sweep_feature(const std::vector<ValueRow>& vals, const Stats& parent,
                   int min_node_size, const AddRow& add_row, const GainFn& gain_fn,
                   int feature, std::optional<SplitCandidate>& best) {
  const int n = static_cast<int>(vals.size());
  Stats left;
  for (int k = 0; k + 1 < n; ++k) {
    add_row(left, vals[k].row);
    if (vals[k].value == vals[k + 1].value) continue;
    const int n_left = k + 1;
    const int n_right = n - n_left;
    if (n_left < min_node_size || n_right < min_node_size) continue;
    const double gain = gain_fn(parent, left);
    if (!best || gain > best->gain) {
      best = SplitCandidate{feature, midpoint(vals[k].value, vals[k + 1].value), gain};
    }
  }
}

std::vector<int> sorted_features(std::span<const int> candidate_features) {
  std::vector<int> feats(candidate_features.begin(), candidate_features.end());
  std::sort(feats.begin(), feats.end());
  return feats;
}

void gather_column(const Eigen::MatrixXd& X, std::span<const int> rows, int feature,
                   std::vector<ValueRow>& vals) {
  vals.clear();
  vals.reserve(rows.size());
  for (int r : rows) vals.push_back({X(r, feature), r});
  std::sort(vals.begin(), vals.end(),
            [](const ValueRow& a, const ValueRow& b) { return a.value < b.value; });
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const int> rows,
                                         const Dataset& data,
                                         std::span<const int> candidate_features,
                                         SplitRule rule, int min_node_size) {
  if (rows.empty() || candidate_features.empty()) {
    throw std::invalid_argument("best_split needs rows and candidate features");
  }
  if (rule == SplitRule::xgb_gain) {
    throw std::invalid_argument("xgb_gain requires gradient data; use best_split_xgb");
  }

  MeanStats parent;
  double y_min = data.target[rows[0]];
  double y_max = y_min;
  for (int r : rows) {
    const double y = data.target[r];
    parent.sum += y;
    ++parent.count;
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  }
  if (y_min == y_max) return std::nullopt;  // pure node

  auto add_row = [&](MeanStats& s, int r) {
    s.sum += data.target[r];
    ++s.count;
  };
  auto gain_fn = [&](const MeanStats& p, const MeanStats& l) {
    return rule == SplitRule::variance ? variance_gain(p, l) : gini_gain(p, l);
  };

  std::optional<SplitCandidate> best;
  std::vector<ValueRow> vals;
  for (int f : sorted_features(candidate_features)) {
    gather_column(data.features, rows, f, vals);
    if (vals.front().value == vals.back().value) continue;  // constant feature
    sweep_feature(vals, parent, min_node_size, add_row, gain_fn, f, best);
  }
  return best;
}

std::optional<SplitCandidate> best_split_xgb(std::span<const int> rows,
                                             const Eigen::MatrixXd& features,
                                             std::span<const int> candidate_features,
                                             std::span<const double> grad,
                                             std::span<const double> hess,
                                             double lambda_w, double gamma,
                                             int min_node_size) {
  if (rows.empty() || candidate_features.empty()) {
    throw std::invalid_argument("best_split_xgb needs rows and candidate features");
  }

  GradStats parent;
  for (int r : rows) {
    parent.g += grad[static_cast<std::size_t>(r)];
    parent.h += hess[static_cast<std::size_t>(r)];
    ++parent.count;
  }

  auto add_row = [&](GradStats& s, int r) {
    s.g += grad[static_cast<std::size_t>(r)];
    s.h += hess[static_cast<std::size_t>(r)];
    ++s.count;
  };
  auto gain_fn = [&](const GradStats& p, const GradStats& l) {
    return xgb_gain(p, l, lambda_w, gamma);
  };

  std::optional<SplitCandidate> best;
  std::vector<ValueRow> vals;
  for (int f : sorted_features(candidate_features)) {
    gather_column(features, rows, f, vals);
    if (vals.front().value == vals.back().value) continue;
    sweep_feature(vals, parent, min_node_size, add_row, gain_fn, f, best);
  }
  if (best && best->gain <= 0.0) return std::nullopt;
  return best;
}

namespace {

class CartBuilder {
 public:
  CartBuilder(const Dataset& data, const TreeParams& params, std::mt19937_64& rng)
      : data_(data), params_(params), rng_(rng) {
    mtry_ = params.mtry;
    if (mtry_ == 0) {
      mtry_ = std::max(1, static_cast<int>(std::floor(std::sqrt(
                              static_cast<double>(data.p())))));
    }
    feature_pool_.resize(static_cast<std::size_t>(data.p()));
    std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
  }

  Tree build() {
    Tree tree;
    tree.num_features = data_.p();
    std::vector<int> rows(static_cast<std::size_t>(data_.n()));
    std::iota(rows.begin(), rows.end(), 0);
    build_node(tree, rows, 0);
    return tree;
  }

 private:
  bool pure(const std::vector<int>& rows) const {
    const double first = data_.target[rows[0]];
    for (int r : rows) {
      if (data_.target[r] != first) return false;
    }
    return true;
  }

  std::vector<int> draw_features() {
    // partial Fisher-Yates over the feature pool
    const int p = data_.p();
    for (int i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<int> pick(i, p - 1);
      std::swap(feature_pool_[static_cast<std::size_t>(i)],
                feature_pool_[static_cast<std::size_t>(pick(rng_))]);
    }
    return std::vector<int>(feature_pool_.begin(), feature_pool_.begin() + mtry_);
  }

  int make_leaf(Tree& tree, const std::vector<int>& rows) {
    double sum = 0.0;
    for (int r : rows) sum += data_.target[r];
    Tree::Node node;
    node.leaf_id = tree.num_leaves++;
    node.value = sum / static_cast<double>(rows.size());
    node.count = static_cast<int>(rows.size());
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  int build_node(Tree& tree, const std::vector<int>& rows, int depth) {
    const bool depth_capped = params_.max_depth && depth >= *params_.max_depth;
    if (depth_capped || static_cast<int>(rows.size()) < 2 * params_.min_node_size ||
        pure(rows)) {
      return make_leaf(tree, rows);
    }

    const std::vector<int> feats = draw_features();
    const auto split = best_split(rows, data_, feats, params_.criterion,
                                  params_.min_node_size);
    if (!split) return make_leaf(tree, rows);

    std::vector<int> left_rows;
    std::vector<int> right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (int r : rows) {
      if (data_.features(r, split->feature) <= split->threshold) {
        left_rows.push_back(r);
      } else {
        right_rows.push_back(r);
      }
    }

    const int index = static_cast<int>(tree.nodes.size());
    Tree::Node node;
    node.feature = split->feature;
    node.threshold = split->threshold;
    tree.nodes.push_back(node);
    const int left = build_node(tree, left_rows, depth + 1);
    const int right = build_node(tree, right_rows, depth + 1);
    tree.nodes[static_cast<std::size_t>(index)].left = left;
    tree.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  const Dataset& data_;
  const TreeParams& params_;
  std::mt19937_64& rng_;
  int mtry_ = 1;
  std::vector<int> feature_pool_;
};

}  // namespace

Tree fit_tree(const Dataset& data, const TreeParams& params, std::mt19937_64& rng) {
  validate(data);
  if (params.min_node_size < 1) {
    throw std::invalid_argument("min_node_size must be >= 1");
  }
  if (params.max_depth && *params.max_depth < 1) {
    throw std::invalid_argument("max_depth must be >= 1");
  }
  if (params.mtry < 0 || params.mtry > data.p()) {
    throw std::invalid_argument("mtry must lie in [1, p] (0 selects the default)");
  }
  if (params.criterion == SplitRule::xgb_gain) {
    throw std::invalid_argument("fit_tree handles variance/gini trees only");
  }
  return CartBuilder(data, params, rng).build();
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  // nodes are stored preorder, so a stack of (index, depth) suffices
  int max_depth = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [idx, d] = stack.back();
    stack.pop_back();
    const Node& node = nodes[static_cast<std::size_t>(idx)];
    if (node.feature < 0) {
      max_depth = std::max(max_depth, d);
    } else {
      stack.push_back({node.left, d + 1});
      stack.push_back({node.right, d + 1});
    }
  }
  return max_depth;
}

namespace {

template <typename GetFeature>
const Tree::Node& route(const Tree& tree, const GetFeature& get) {
  const Tree::Node* node = &tree.nodes[0];
  while (node->feature >= 0) {
    node = get(node->feature) <= node->threshold
               ? &tree.nodes[static_cast<std::size_t>(node->left)]
               : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

void check_dim(const Tree& tree, Eigen::Index got) {
  if (got != tree.num_features) {
    throw std::invalid_argument("input dimension does not match the fitted tree");
  }
}

}  // namespace

double predict_tree(const Tree& tree, const Eigen::VectorXd& x) {
  check_dim(tree, x.size());
  return route(tree, [&](int f) { return x[f]; }).value;
}

int leaf_index(const Tree& tree, const Eigen::VectorXd& x) {
  check_dim(tree, x.size());
  return route(tree, [&](int f) { return x[f]; }).leaf_id;
}

double predict_tree(const Tree& tree, const Eigen::MatrixXd& X, int row) {
  check_dim(tree, X.cols());
  return route(tree, [&](int f) { return X(row, f); }).value;
}

int leaf_index(const Tree& tree, const Eigen::MatrixXd& X, int row) {
  check_dim(tree, X.cols());
  return route(tree, [&](int f) { return X(row, f); }).leaf_id;
}

}  // namespace treekernel
