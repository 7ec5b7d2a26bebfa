#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "treekernel/random.hpp"
#include "treekernel/tree.hpp"

using namespace treekernel;

namespace {

Dataset make_data(const std::vector<std::vector<double>>& rows,
                  const std::vector<double>& y,
                  Task task = Task::regression) {
  Dataset data;
  data.task = task;
  data.features.resize(static_cast<int>(rows.size()),
                       static_cast<int>(rows[0].size()));
  data.target.resize(static_cast<int>(y.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      data.features(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
    data.target[static_cast<int>(i)] = y[i];
  }
  return data;
}

double sse_of(const Dataset& data, const std::vector<int>& rows) {
  double mean = 0.0;
  for (int r : rows) mean += data.target[r];
  mean /= static_cast<double>(rows.size());
  double sse = 0.0;
  for (int r : rows) {
    sse += (data.target[r] - mean) * (data.target[r] - mean);
  }
  return sse;
}

// Brute-force oracle: every (feature, midpoint) pair, direct SSE reduction.
struct OracleSplit {
  int feature;
  double threshold;
  double gain;
};

std::optional<OracleSplit> oracle_best_split_variance(const Dataset& data,
                                                      const std::vector<int>& rows,
                                                      int min_node_size) {
  std::optional<OracleSplit> best;
  const double parent = sse_of(data, rows);
  for (int f = 0; f < data.p(); ++f) {
    std::vector<double> values;
    for (int r : rows) values.push_back(data.features(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double thr = values[k] + 0.5 * (values[k + 1] - values[k]);
      std::vector<int> left;
      std::vector<int> right;
      for (int r : rows) {
        (data.features(r, f) <= thr ? left : right).push_back(r);
      }
      if (static_cast<int>(left.size()) < min_node_size ||
          static_cast<int>(right.size()) < min_node_size) {
        continue;
      }
      const double gain = parent - sse_of(data, left) - sse_of(data, right);
      if (!best || gain > best->gain + 1e-12) {
        best = OracleSplit{f, thr, gain};
      }
    }
  }
  return best;
}

Dataset xor_data() {
  return make_data({{0, 0}, {0, 1}, {1, 0}, {1, 1}}, {0, 1, 1, 0});
}

std::vector<int> all_rows(const Dataset& data) {
  std::vector<int> rows(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) rows[static_cast<std::size_t>(i)] = i;
  return rows;
}

Dataset random_dataset(std::mt19937_64& rng, Task task) {
  std::uniform_int_distribution<int> n_dist(2, 60);
  std::uniform_int_distribution<int> p_dist(1, 6);
  const int n = n_dist(rng);
  const int p = p_dist(rng);
  Dataset data;
  data.task = task;
  data.features.resize(n, p);
  data.target.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 4);  // duplicates force tied values
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      data.features(i, j) = 0.25 * grid(rng);
    }
    data.target[i] = task == Task::classification
                         ? static_cast<double>(grid(rng) % 2)
                         : unif(rng);
  }
  return data;
}

}  // namespace

TEST_CASE("best_split variance matches the hand oracle") {
  const Dataset data = make_data({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  const std::vector<int> rows = all_rows(data);
  const std::vector<int> feats{0};
  const auto split = best_split(rows, data, feats, SplitRule::variance);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == doctest::Approx(2.5));
  CHECK(split->gain == doctest::Approx(1.0));  // parent SSE 1.0, children 0

  const auto oracle = oracle_best_split_variance(data, rows, 1);
  REQUIRE(oracle.has_value());
  CHECK(split->feature == oracle->feature);
  CHECK(split->threshold == doctest::Approx(oracle->threshold));
  CHECK(split->gain == doctest::Approx(oracle->gain));
}

TEST_CASE("best_split returns none on a constant target") {
  const Dataset data = make_data({{1}, {2}, {3}}, {0.7, 0.7, 0.7});
  const std::vector<int> feats{0};
  CHECK_FALSE(best_split(all_rows(data), data, feats, SplitRule::variance));
}

TEST_CASE("best_split gini on a separable pair") {
  const Dataset data = make_data({{0}, {1}}, {0, 1}, Task::classification);
  const std::vector<int> feats{0};
  const auto split = best_split(all_rows(data), data, feats, SplitRule::gini);
  REQUIRE(split.has_value());
  CHECK(split->threshold == doctest::Approx(0.5));
  CHECK(split->gain == doctest::Approx(0.5));  // parent impurity 0.5, children pure
}

TEST_CASE("best_split respects min_node_size") {
  const Dataset data = make_data({{1}, {2}, {3}, {4}}, {0, 1, 0, 1});
  const std::vector<int> feats{0};
  const auto split = best_split(all_rows(data), data, feats, SplitRule::variance, 2);
  REQUIRE(split.has_value());
  CHECK(split->threshold == doctest::Approx(2.5));  // 1.5 and 3.5 starve a child

  // two rows cannot produce two children of size two
  const Dataset pair = make_data({{1}, {2}}, {0, 1});
  CHECK_FALSE(best_split(all_rows(pair), pair, feats, SplitRule::variance, 2));
}

TEST_CASE("constant features are skipped") {
  const Dataset data = make_data({{5, 1}, {5, 2}, {5, 3}, {5, 4}}, {0, 0, 1, 1});
  const std::vector<int> feats{0, 1};
  const auto split = best_split(all_rows(data), data, feats, SplitRule::variance);
  REQUIRE(split.has_value());
  CHECK(split->feature == 1);
}

TEST_CASE("gain ties break to the lower feature index") {
  // both features admit the same perfect split
  const Dataset data = make_data({{1, 1}, {2, 2}, {3, 3}, {4, 4}}, {0, 0, 1, 1});
  const std::vector<int> feats{1, 0};
  const auto split = best_split(all_rows(data), data, feats, SplitRule::variance);
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
}

TEST_CASE("xor needs depth two and fit_tree reaches it") {
  const Dataset data = xor_data();

  // oracle: no depth-1 tree (single split with constant leaves) fits XOR
  for (int f = 0; f < 2; ++f) {
    std::vector<int> left;
    std::vector<int> right;
    for (int r = 0; r < 4; ++r) {
      (data.features(r, f) <= 0.5 ? left : right).push_back(r);
    }
    CHECK(sse_of(data, left) + sse_of(data, right) > 0.0);
  }

  TreeParams params;
  params.min_node_size = 1;
  params.mtry = 2;
  auto rng = make_rng(17);
  const Tree tree = fit_tree(data, params, rng);
  CHECK(tree.depth() >= 2);
  CHECK(tree.num_leaves == 4);

  std::set<int> ids;
  for (int i = 0; i < 4; ++i) {
    const Eigen::VectorXd x = data.features.row(i);
    CHECK(predict_tree(tree, x) == doctest::Approx(data.target[i]));
    ids.insert(leaf_index(tree, x));
  }
  CHECK(ids.size() == 4);
}

TEST_CASE("degenerate fits") {
  TreeParams params;
  params.min_node_size = 1;
  params.mtry = 1;
  auto rng = make_rng(3);

  const Dataset single = make_data({{2.0}}, {3.2});
  const Tree lone = fit_tree(single, params, rng);
  CHECK(lone.num_leaves == 1);
  CHECK(predict_tree(lone, Eigen::VectorXd::Constant(1, -100.0)) ==
        doctest::Approx(3.2));
  CHECK(leaf_index(lone, Eigen::VectorXd::Constant(1, 55.0)) == 0);

  const Dataset pure =
      make_data({{1}, {2}, {3}}, {0, 0, 0}, Task::classification);
  TreeParams gini_params = params;
  gini_params.criterion = SplitRule::gini;
  const Tree flat = fit_tree(pure, gini_params, rng);
  CHECK(flat.num_leaves == 1);
  CHECK(flat.nodes[0].value == 0.0);
}

TEST_CASE("points on the threshold route left") {
  const Dataset data = make_data({{1}, {2}, {3}, {4}}, {0, 0, 1, 1});
  TreeParams params;
  params.min_node_size = 1;
  params.mtry = 1;
  auto rng = make_rng(5);
  const Tree tree = fit_tree(data, params, rng);
  REQUIRE(tree.nodes[0].feature == 0);
  REQUIRE(tree.nodes[0].threshold == doctest::Approx(2.5));
  CHECK(predict_tree(tree, Eigen::VectorXd::Constant(1, 2.5)) ==
        doctest::Approx(0.0));
}

TEST_CASE("dimension mismatch is rejected") {
  const Dataset data = make_data({{1, 0}, {2, 0}}, {0, 1});
  TreeParams params;
  params.min_node_size = 1;
  params.mtry = 2;
  auto rng = make_rng(5);
  const Tree tree = fit_tree(data, params, rng);
  CHECK_THROWS_AS(predict_tree(tree, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(leaf_index(tree, Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}

TEST_CASE("fitted trees keep the partition invariants") {
  auto rng = make_rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const Task task = trial % 2 == 0 ? Task::regression : Task::classification;
    const Dataset data = random_dataset(rng, task);
    TreeParams params;
    params.min_node_size = 1 + trial % 4;
    params.mtry = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(data.p()));
    params.criterion = task == Task::regression ? SplitRule::variance : SplitRule::gini;
    if (trial % 5 == 0) params.max_depth = 3;

    auto fit_rng = make_rng(1000 + trial);
    const Tree tree = fit_tree(data, params, fit_rng);

    // every row lands in exactly one leaf, ids dense in [0, T)
    std::map<int, std::vector<int>> members;
    for (int i = 0; i < data.n(); ++i) {
      members[leaf_index(tree, data.features, i)].push_back(i);
    }
    std::size_t covered = 0;
    for (const auto& [leaf_id, rows] : members) {
      CHECK(leaf_id >= 0);
      CHECK(leaf_id < tree.num_leaves);
      covered += rows.size();
    }
    CHECK(covered == static_cast<std::size_t>(data.n()));

    int leaves_seen = 0;
    for (const auto& node : tree.nodes) {
      if (node.feature >= 0) continue;
      ++leaves_seen;
      CHECK(node.count >= params.min_node_size);
      // leaf value is the mean of the routed training targets
      const auto it = members.find(node.leaf_id);
      REQUIRE(it != members.end());
      CHECK(static_cast<int>(it->second.size()) == node.count);
      double mean = 0.0;
      for (int r : it->second) mean += data.target[r];
      mean /= static_cast<double>(it->second.size());
      CHECK(node.value == doctest::Approx(mean).epsilon(1e-12));
    }
    CHECK(leaves_seen == tree.num_leaves);

    if (params.max_depth) CHECK(tree.depth() <= *params.max_depth);

    // splits never increase the summed SSE (non-negative gain)
    std::vector<std::pair<int, std::vector<int>>> stack{{0, all_rows(data)}};
    while (!stack.empty()) {
      auto [idx, rows] = std::move(stack.back());
      stack.pop_back();
      const Tree::Node& node = tree.nodes[static_cast<std::size_t>(idx)];
      if (node.feature < 0) continue;
      std::vector<int> left;
      std::vector<int> right;
      for (int r : rows) {
        (data.features(r, node.feature) <= node.threshold ? left : right)
            .push_back(r);
      }
      CHECK(!left.empty());
      CHECK(!right.empty());
      CHECK(sse_of(data, rows) - sse_of(data, left) - sse_of(data, right) >=
            -1e-9);
      stack.push_back({node.left, std::move(left)});
      stack.push_back({node.right, std::move(right)});
    }

    // same data, params, and seed reproduce the same structure
    auto rng_a = make_rng(1000 + trial);
    auto rng_b = make_rng(1000 + trial);
    const Tree a = fit_tree(data, params, rng_a);
    const Tree b = fit_tree(data, params, rng_b);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t k = 0; k < a.nodes.size(); ++k) {
      CHECK(a.nodes[k].feature == b.nodes[k].feature);
      CHECK(a.nodes[k].threshold == b.nodes[k].threshold);
      CHECK(a.nodes[k].value == b.nodes[k].value);
      CHECK(a.nodes[k].leaf_id == b.nodes[k].leaf_id);
    }
  }
}

TEST_CASE("best_split agrees with the oracle on random data") {
  auto rng = make_rng(2718);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset data = random_dataset(rng, Task::regression);
    std::vector<int> feats(static_cast<std::size_t>(data.p()));
    for (int j = 0; j < data.p(); ++j) feats[static_cast<std::size_t>(j)] = j;
    const int min_node_size = 1 + trial % 3;

    const auto got =
        best_split(all_rows(data), data, feats, SplitRule::variance, min_node_size);
    const auto oracle = oracle_best_split_variance(data, all_rows(data), min_node_size);

    // the oracle has no purity shortcut, so compare gains when both exist
    if (got && oracle) {
      CHECK(got->gain == doctest::Approx(oracle->gain).epsilon(1e-9));
    } else if (oracle && !got) {
      // only a pure node may drop a split the oracle found
      CHECK(oracle->gain <= 1e-12);
    }
  }
}
