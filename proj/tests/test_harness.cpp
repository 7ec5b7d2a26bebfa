#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "treekernel/harness.hpp"
#include "treekernel/kernel.hpp"
#include "treekernel/krr.hpp"
#include "treekernel/random.hpp"

using namespace treekernel;

namespace {

Dataset friedman_dataset(int n, int p, std::uint64_t seed,
                         Task task = Task::regression) {
  const SimSetup setup = make_setup(SimName::friedman);
  auto rng = make_rng(seed);
  if (task == Task::classification) {
    const SimSample sample = gen_binary(setup, n, p, rng, 14.4);
    return {sample.features, sample.binary_target->cast<double>(),
            Task::classification};
  }
  const SimSample sample = gen_continuous(setup, n, p, rng);
  return {sample.features, sample.continuous_target, Task::regression};
}

std::string toy_csv(int rows) {
  std::ostringstream out;
  out << "a,b,y\n";
  for (int i = 0; i < rows; ++i) {
    out << i << ',' << (i % 5) << ',' << (2.0 * i + (i % 3)) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("split produces a disjoint cover") {
  auto rng = make_rng(1);
  const auto [train, test] = split_indices(8, 0.75, rng);
  CHECK(train.size() == 6);
  CHECK(test.size() == 2);
  std::set<int> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  CHECK(all.size() == 8);

  auto rng_a = make_rng(2);
  auto rng_b = make_rng(2);
  CHECK(split_indices(40, 0.75, rng_a) == split_indices(40, 0.75, rng_b));

  CHECK_THROWS_AS(split_indices(3, 0.75, rng), std::invalid_argument);
  CHECK_THROWS_AS(split_indices(10, 1.0, rng), std::invalid_argument);
}

TEST_CASE("split covers the index set for random sizes") {
  auto meta_rng = make_rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(meta_rng() % 400);
    auto rng = make_rng(1000 + trial);
    const auto [train, test] = split_indices(n, 0.75, rng);
    CHECK(static_cast<int>(train.size()) ==
          static_cast<int>(std::llround(0.75 * n)));
    std::vector<int> joined(train);
    joined.insert(joined.end(), test.begin(), test.end());
    std::sort(joined.begin(), joined.end());
    bool contiguous = static_cast<int>(joined.size()) == n;
    for (int i = 0; i < static_cast<int>(joined.size()) && contiguous; ++i) {
      contiguous = joined[static_cast<std::size_t>(i)] == i;
    }
    CHECK(contiguous);
  }
}

TEST_CASE("metrics") {
  const Eigen::VectorXd a = (Eigen::VectorXd(2) << 0.0, 2.0).finished();
  const Eigen::VectorXd b = (Eigen::VectorXd(2) << 1.0, 1.0).finished();
  CHECK(mse(a, a) == 0.0);
  CHECK(mse(a, b) == doctest::Approx(1.0));
  CHECK(mse(3.0 * a, 3.0 * b) == doctest::Approx(9.0 * mse(a, b)));
  CHECK_THROWS_AS(mse(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  Eigen::VectorXd preds = ones;
  CHECK(accuracy(preds, ones) == 1.0);
  CHECK(accuracy(Eigen::VectorXd::Zero(4), ones) == 0.0);
  preds[0] = 0.0;
  CHECK(accuracy(preds, ones) == doctest::Approx(0.75));
  Eigen::VectorXd bad = ones;
  bad[0] = 0.5;
  CHECK_THROWS_AS(accuracy(bad, ones), std::invalid_argument);
}

TEST_CASE("median and dichotomization") {
  const Eigen::VectorXd v = (Eigen::VectorXd(4) << 1.0, 2.0, 3.0, 4.0).finished();
  CHECK(median_of(v) == doctest::Approx(2.5));
  const Eigen::VectorXd d = dichotomize(v, 2.5);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 1.0);
  CHECK(d[3] == 1.0);

  // ties land in class 0
  const Eigen::VectorXd tied = (Eigen::VectorXd(4) << 1.0, 2.0, 2.0, 3.0).finished();
  const Eigen::VectorXd dt = dichotomize(tied, 2.0);
  CHECK(dt.sum() == 1.0);

  const Eigen::VectorXd odd = (Eigen::VectorXd(3) << 9.0, 1.0, 5.0).finished();
  CHECK(median_of(odd) == 5.0);
}

TEST_CASE("hyperparameter overrides parse strictly") {
  const HyperOverrides hyper = parse_overrides_json(
      R"({"num_trees": 50, "mtry": 3, "min_node_size": 7, "rounds": 25,
          "eta": 0.1, "max_depth": 4, "gamma": 0.5, "lambda_w": 2.0})");
  CHECK(hyper.num_trees == 50);
  CHECK(hyper.mtry == 3);
  CHECK(hyper.min_node_size == 7);
  CHECK(hyper.rounds == 25);
  CHECK(hyper.eta == 0.1);
  CHECK(hyper.max_depth == 4);
  CHECK(hyper.gamma == 0.5);
  CHECK(hyper.lambda_w == 2.0);
  CHECK_THROWS_AS(parse_overrides_json(R"({"trees": 50})"), std::invalid_argument);
}

TEST_CASE("sensitivity changes exactly the two shallow-tree knobs") {
  BenchConfig base;
  BenchConfig sens = base;
  sens.sensitivity = true;

  for (Task task : {Task::regression, Task::classification}) {
    const RfParams rf_a = resolve_rf_params(base, task, 20);
    const RfParams rf_b = resolve_rf_params(sens, task, 20);
    CHECK(rf_b.tree.min_node_size == (task == Task::regression ? 10 : 2));
    CHECK(rf_a.tree.min_node_size == (task == Task::regression ? 5 : 1));
    CHECK(rf_a.num_trees == rf_b.num_trees);
    CHECK(rf_a.tree.mtry == rf_b.tree.mtry);
    CHECK(rf_a.bootstrap == rf_b.bootstrap);
    CHECK(rf_a.tree.criterion == rf_b.tree.criterion);
    CHECK(rf_a.tree.max_depth == rf_b.tree.max_depth);

    const GbtParams gbt_a = resolve_gbt_params(base, task);
    const GbtParams gbt_b = resolve_gbt_params(sens, task);
    CHECK(gbt_b.max_depth == 2);
    CHECK(gbt_a.max_depth == 6);
    CHECK(gbt_a.rounds == gbt_b.rounds);
    CHECK(gbt_a.eta == gbt_b.eta);
    CHECK(gbt_a.gamma == gbt_b.gamma);
    CHECK(gbt_a.lambda_w == gbt_b.lambda_w);
    CHECK(gbt_a.loss == gbt_b.loss);
  }

  const BenchConfig full_scale = [] {
    BenchConfig c;
    c.paper_scale = true;
    return c;
  }();
  CHECK(resolve_rf_params(full_scale, Task::regression, 20).num_trees == 500);
  CHECK(resolve_gbt_params(full_scale, Task::regression).rounds == 100);
  CHECK(resolve_rf_params(BenchConfig{}, Task::regression, 20).num_trees == 100);
  CHECK(resolve_rf_params(BenchConfig{}, Task::regression, 20).tree.mtry == 4);
}

TEST_CASE("constant targets make every method exact") {
  Dataset data = friedman_dataset(40, 5, 51);
  data.target.setConstant(2.5);
  auto rng = make_rng(52);
  const auto [tr, te] = split_indices(40, 0.75, rng);
  const Dataset train = subset(data, tr);
  const Dataset test = subset(data, te);
  BenchConfig config;
  config.hyper.num_trees = 10;
  config.hyper.rounds = 40;

  for (Method method : {Method::rf, Method::rf_kernel}) {
    const Eigen::VectorXd preds = run_method(method, train, test, config);
    CHECK(mse(preds, test.target) <= 1e-20);
  }
}

TEST_CASE("fully isolating trees give an identity kernel and interpolate") {
  // distinct 1-d points, no bootstrap, deep trees: every leaf holds one row
  Dataset data;
  data.task = Task::regression;
  data.features.resize(12, 1);
  data.target.resize(12);
  for (int i = 0; i < 12; ++i) {
    data.features(i, 0) = i;
    data.target[i] = std::sin(i * 1.7) * 3.0;
  }
  RfParams params;
  params.num_trees = 5;
  params.bootstrap = false;
  params.tree.min_node_size = 1;
  params.tree.mtry = 1;
  const Ensemble e = fit_rf(data, params, 3);
  const KernelMatrix k = ensemble_kernel(e, data.features);
  CHECK((k.values - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() ==
        0.0);

  const double lambda = select_lambda(k);
  CHECK(lambda == 0.0);
  const KrrModel model = fit_krr(k, data.target, lambda);
  for (int i = 0; i < 12; ++i) {
    CHECK(predict_krr(model, k.values.col(i)) ==
          doctest::Approx(data.target[i]).epsilon(1e-12));
  }
}

TEST_CASE("run_method matches the shared-fit path") {
  const Dataset data = friedman_dataset(120, 8, 53);
  auto rng = make_rng(54);
  const auto [tr, te] = split_indices(data.n(), 0.75, rng);
  const Dataset train = subset(data, tr);
  const Dataset test = subset(data, te);
  BenchConfig config;
  config.hyper.num_trees = 12;
  config.hyper.rounds = 8;
  config.seed = 99;

  const std::vector<Method> methods = {Method::rf, Method::rf_kernel, Method::gbt,
                                       Method::gbt_kernel};
  const auto shared = run_methods(methods, train, test, config);
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const Eigen::VectorXd solo = run_method(methods[k], train, test, config);
    CHECK((solo - shared[k]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("kernel predictions never read other test rows") {
  const Dataset data = friedman_dataset(100, 6, 55);
  auto rng = make_rng(56);
  const auto [tr, te] = split_indices(data.n(), 0.75, rng);
  const Dataset train = subset(data, tr);
  Dataset test = subset(data, te);
  BenchConfig config;
  config.hyper.num_trees = 10;
  config.hyper.rounds = 6;
  config.seed = 3;

  for (Method method : {Method::rf_kernel, Method::gbt_kernel}) {
    const Eigen::VectorXd before = run_method(method, train, test, config);
    Dataset tampered = test;
    tampered.features.row(1).setConstant(123.0);
    tampered.target[1] = -999.0;
    const Eigen::VectorXd after = run_method(method, train, tampered, config);
    CHECK(after[0] == before[0]);
    CHECK(after[2] == before[2]);
  }
}

TEST_CASE("run_simulation row accounting and determinism") {
  const SimSetup setup = make_setup(SimName::friedman);
  BenchConfig config;
  config.reps = 1;
  config.methods = {Method::rf};
  config.hyper.num_trees = 5;
  config.seed = 1;
  const auto single = run_simulation(setup, 40, 5, TargetKind::continuous, config);
  CHECK(single.size() == 1);
  CHECK(single[0].setup == "friedman");
  CHECK(single[0].metric == "mse");
  CHECK(single[0].n == 40);
  CHECK(single[0].p == 5);

  config.reps = 3;
  config.methods = {Method::rf, Method::gbt};
  config.hyper.rounds = 4;
  const auto rows = run_simulation(setup, 40, 5, TargetKind::continuous, config);
  CHECK(rows.size() == 6);

  const auto again = run_simulation(setup, 40, 5, TargetKind::continuous, config);
  CHECK(rows_csv_string(rows) == rows_csv_string(again));

  BenchConfig threaded = config;
  threaded.threads = 4;
  const auto parallel = run_simulation(setup, 40, 5, TargetKind::continuous, threaded);
  CHECK(rows_csv_string(rows) == rows_csv_string(parallel));
}

TEST_CASE("binary simulation reports accuracy rows") {
  const SimSetup setup = make_setup(SimName::friedman);
  BenchConfig config;
  config.reps = 2;
  config.methods = {Method::rf};
  config.hyper.num_trees = 10;
  config.seed = 5;
  const auto rows = run_simulation(setup, 60, 5, TargetKind::binary, config);
  CHECK(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.metric == "accuracy");
    CHECK(row.value >= 0.0);
    CHECK(row.value <= 1.0);
  }
}

TEST_CASE("run_real on a toy csv") {
  std::istringstream in(toy_csv(20));
  const TabularDataset table = read_csv(in, "toy");
  BenchConfig config;
  config.reps = 2;
  config.hyper.num_trees = 8;
  config.hyper.rounds = 5;
  config.seed = 6;

  const auto rows = run_real(table, "y", Task::regression, config);
  CHECK(rows.size() == 8);  // 2 reps x 4 methods
  for (const auto& row : rows) {
    CHECK(row.setup == "toy");
    CHECK(row.metric == "mse");
    CHECK(row.n == 20);
    CHECK(row.p == 2);
  }

  const auto classified = run_real(table, "y", Task::classification, config);
  for (const auto& row : classified) {
    CHECK(row.metric == "accuracy");
    CHECK(row.value >= 0.0);
    CHECK(row.value <= 1.0);
  }

  CHECK_THROWS_AS(run_real(table, "missing", Task::regression, config),
                  std::invalid_argument);
}

TEST_CASE("real-data regression beats the mean predictor on friedman csv") {
  const SimSetup setup = make_setup(SimName::friedman);
  auto rng = make_rng(57);
  const SimSample sample = gen_continuous(setup, 300, 8, rng);
  std::ostringstream csv;
  csv << "x1,x2,x3,x4,x5,x6,x7,x8,y\n";
  for (int i = 0; i < 300; ++i) {
    for (int j = 0; j < 8; ++j) csv << sample.features(i, j) << ',';
    csv << sample.continuous_target[i] << '\n';
  }
  std::istringstream in(csv.str());
  const TabularDataset table = read_csv(in, "friedman_csv");

  BenchConfig config;
  config.reps = 3;
  config.methods = {Method::rf};
  config.hyper.num_trees = 50;
  config.seed = 7;
  const auto rows = run_real(table, "y", Task::regression, config);
  double mean_mse = 0.0;
  for (const auto& row : rows) mean_mse += row.value;
  mean_mse /= static_cast<double>(rows.size());

  const Eigen::VectorXd y = sample.continuous_target;
  const double variance = (y.array() - y.mean()).square().sum() / (y.size() - 1);
  CHECK(mean_mse < variance);
}

TEST_CASE("large tables are subsampled to the 2000-row cap per rep") {
  std::istringstream in(toy_csv(2100));
  const TabularDataset table = read_csv(in, "big");
  BenchConfig config;
  config.reps = 2;
  config.methods = {Method::rf};
  config.hyper.num_trees = 3;
  config.seed = 8;
  const auto rows = run_real(table, "y", Task::regression, config);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) CHECK(row.n == 2000);

  BenchConfig threaded = config;
  threaded.threads = 3;
  const auto parallel = run_real(table, "y", Task::regression, threaded);
  CHECK(rows_csv_string(rows) == rows_csv_string(parallel));
}

TEST_CASE("dataset validation guards targets") {
  Dataset bad = friedman_dataset(10, 5, 60);
  bad.task = Task::classification;
  bad.target[3] = 0.5;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  Dataset nan = friedman_dataset(10, 5, 61);
  nan.target[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(nan), std::invalid_argument);
}

TEST_CASE("ingestion errors name the offending column") {
  std::istringstream in("a,b,y\n1,oops,3\n");
  try {
    read_csv(in, "bad");
    FAIL("expected an ingestion error");
  } catch (const std::invalid_argument& e) {
    const std::string message = e.what();
    CHECK(message.find("'b'") != std::string::npos);
  }
}

TEST_CASE("summaries match a hand-computed fixture") {
  std::vector<ResultRow> rows;
  const double values[5] = {1.0, 2.0, 3.0, 4.0, 5.0};
  for (int rep = 0; rep < 5; ++rep) {
    rows.push_back({"fix", 10, 2, rep, "rf", "mse", values[rep]});
  }
  rows.push_back({"fix", 10, 2, 0, "gbt", "mse", 2.0});
  const auto summaries = summarize(rows);
  REQUIRE(summaries.size() == 2);
  CHECK(summaries[0].setup == "fix");
  CHECK(summaries[0].method == "rf");
  CHECK(summaries[0].mean == 3.0);
  CHECK(summaries[0].sd == doctest::Approx(1.58114).epsilon(1e-9));
  CHECK(summaries[1].method == "gbt");
  CHECK(summaries[1].sd == 0.0);
}

TEST_CASE("csv rows are stable and fully precise") {
  std::vector<ResultRow> rows{{"s", 8, 2, 0, "rf", "mse", 1.0 / 3.0}};
  const std::string text = rows_csv_string(rows);
  CHECK(text.find("setup,n,p,rep,method,metric,value\n") == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);

  const std::string json = summary_json_string(summarize(rows));
  CHECK(json.find("\"method\": \"rf\"") != std::string::npos);
  CHECK(json.find("0.333333") != std::string::npos);
}
