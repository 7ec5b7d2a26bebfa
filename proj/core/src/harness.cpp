#include "treekernel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "treekernel/kernel.hpp"
#include "treekernel/krr.hpp"
#include "treekernel/parallel.hpp"
#include "treekernel/random.hpp"

namespace treekernel {
namespace {

using json = nlohmann::json;

// stream salts for per-rep seed derivation
constexpr std::uint64_t kMedianStream = 7;
constexpr std::uint64_t kSubsampleStream = 0;
constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kRfStream = 3;
constexpr std::uint64_t kGbtStream = 4;

constexpr std::int64_t kMedianMcSamples = 1000000;
constexpr int kSubsampleCap = 2000;

std::string format_full(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double round_sig6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::strtod(buf, nullptr);
}

Eigen::VectorXd encode_pm1(const Eigen::VectorXd& y01) {
  return 2.0 * y01.array() - 1.0;
}

struct FamilyFits {
  std::optional<Ensemble> rf;
  std::optional<Ensemble> gbt;
};

const Ensemble& rf_fit(FamilyFits& fits, const Dataset& train,
                       const BenchConfig& config) {
  if (!fits.rf) {
    const RfParams params = resolve_rf_params(config, train.task, train.p());
    fits.rf = fit_rf(train, params, mix_seed(config.seed, kRfStream));
  }
  return *fits.rf;
}

const Ensemble& gbt_fit(FamilyFits& fits, const Dataset& train,
                        const BenchConfig& config) {
  if (!fits.gbt) {
    const GbtParams params = resolve_gbt_params(config, train.task);
    fits.gbt = fit_gbt(train, params, mix_seed(config.seed, kGbtStream));
  }
  return *fits.gbt;
}

Eigen::VectorXd ensemble_predictions(const Ensemble& e, const Dataset& test) {
  Eigen::VectorXd out(test.n());
  for (int i = 0; i < test.n(); ++i) {
    const Eigen::VectorXd x = test.features.row(i);
    out[i] = e.is_classification() ? static_cast<double>(predict_class(e, x))
                                   : (e.is_rf() ? predict_rf(e, x) : predict_gbt(e, x));
  }
  return out;
}

// KRR on the ensemble kernel: train Gram -> lambda ladder -> coefficients,
// then test-to-train kernel rows. Test rows never touch the fit.
Eigen::VectorXd kernel_predictions(const Ensemble& e, const Dataset& train,
                                   const Dataset& test) {
  const KernelMatrix k_train = ensemble_kernel(e, train.features);
  const double lambda = select_lambda(k_train);
  const Eigen::VectorXd y = train.task == Task::classification
                                ? encode_pm1(train.target)
                                : train.target;
  const KrrModel model = fit_krr(k_train, y, lambda, train.task);
  const KernelMatrix k_cross = ensemble_kernel(e, test.features, train.features);
  Eigen::VectorXd scores = predict_krr_batch(model, k_cross.values);
  if (train.task == Task::classification) {
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      scores[i] = scores[i] > 0.0 ? 1.0 : 0.0;
    }
  }
  return scores;
}

Eigen::VectorXd run_one(Method method, FamilyFits& fits, const Dataset& train,
                        const Dataset& test, const BenchConfig& config) {
  switch (method) {
    case Method::rf:
      return ensemble_predictions(rf_fit(fits, train, config), test);
    case Method::gbt:
      return ensemble_predictions(gbt_fit(fits, train, config), test);
    case Method::rf_kernel:
      return kernel_predictions(rf_fit(fits, train, config), train, test);
    case Method::gbt_kernel:
      return kernel_predictions(gbt_fit(fits, train, config), train, test);
  }
  throw std::invalid_argument("unknown method");
}

Dataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& target,
                     Task task) {
  Dataset data;
  data.features = features;
  data.target = target;
  data.task = task;
  return data;
}

std::vector<ResultRow> evaluate_rep(const std::string& setup_name, int rep,
                                    const Dataset& full, const BenchConfig& config,
                                    std::uint64_t rep_seed) {
  auto split_rng = make_rng(rep_seed, kSplitStream);
  const auto [train_idx, test_idx] =
      split_indices(full.n(), config.train_fraction, split_rng);
  const Dataset train = subset(full, train_idx);
  const Dataset test = subset(full, test_idx);

  BenchConfig local = config;
  local.seed = rep_seed;
  local.task = full.task;
  const std::vector<Eigen::VectorXd> preds =
      run_methods(config.methods, train, test, local);

  const bool classify = full.task == Task::classification;
  std::vector<ResultRow> rows;
  rows.reserve(config.methods.size());
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    ResultRow row;
    row.setup = setup_name;
    row.n = full.n();
    row.p = full.p();
    row.rep = rep;
    row.method = to_string(config.methods[k]);
    row.metric = classify ? "accuracy" : "mse";
    row.value = classify ? accuracy(preds[k], test.target) : mse(preds[k], test.target);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::rf: return "rf";
    case Method::rf_kernel: return "rf_kernel";
    case Method::gbt: return "gbt";
    case Method::gbt_kernel: return "gbt_kernel";
  }
  return "?";
}

std::optional<Method> method_from(const std::string& token) {
  for (Method m : {Method::rf, Method::rf_kernel, Method::gbt, Method::gbt_kernel}) {
    if (token == to_string(m)) return m;
  }
  return std::nullopt;
}

HyperOverrides parse_overrides_json(const std::string& text) {
  const json doc = json::parse(text);
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  HyperOverrides hyper;
  for (const auto& [key, value] : doc.items()) {
    if (key == "num_trees") hyper.num_trees = value.get<int>();
    else if (key == "mtry") hyper.mtry = value.get<int>();
    else if (key == "min_node_size") hyper.min_node_size = value.get<int>();
    else if (key == "rounds") hyper.rounds = value.get<int>();
    else if (key == "max_depth") hyper.max_depth = value.get<int>();
    else if (key == "eta") hyper.eta = value.get<double>();
    else if (key == "gamma") hyper.gamma = value.get<double>();
    else if (key == "lambda_w") hyper.lambda_w = value.get<double>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return hyper;
}

HyperOverrides load_overrides(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_overrides_json(text);
}

RfParams resolve_rf_params(const BenchConfig& config, Task task, int p) {
  RfParams params;
  params.num_trees = config.paper_scale ? 500 : 100;
  params.bootstrap = true;
  params.tree.criterion =
      task == Task::regression ? SplitRule::variance : SplitRule::gini;
  params.tree.mtry = std::max(
      1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
  if (config.sensitivity) {
    params.tree.min_node_size = task == Task::regression ? 10 : 2;
  } else {
    params.tree.min_node_size = task == Task::regression ? 5 : 1;
  }
  if (config.hyper.num_trees) params.num_trees = *config.hyper.num_trees;
  if (config.hyper.mtry) params.tree.mtry = *config.hyper.mtry;
  if (config.hyper.min_node_size) params.tree.min_node_size = *config.hyper.min_node_size;
  return params;
}

GbtParams resolve_gbt_params(const BenchConfig& config, Task task) {
  GbtParams params;
  params.rounds = config.paper_scale ? 100 : 50;
  params.loss =
      task == Task::regression ? GbtLoss::squared_error : GbtLoss::logistic;
  if (config.sensitivity) params.max_depth = 2;
  if (config.hyper.rounds) params.rounds = *config.hyper.rounds;
  if (config.hyper.eta) params.eta = *config.hyper.eta;
  if (config.hyper.max_depth) params.max_depth = *config.hyper.max_depth;
  if (config.hyper.gamma) params.gamma = *config.hyper.gamma;
  if (config.hyper.lambda_w) params.lambda_w = *config.hyper.lambda_w;
  return params;
}

std::pair<std::vector<int>, std::vector<int>> split_indices(
    int n, double train_fraction, std::mt19937_64& rng) {
  if (n < 4) throw std::invalid_argument("split needs n >= 4");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  int n_train = static_cast<int>(std::llround(train_fraction * n));
  n_train = std::clamp(n_train, 1, n - 1);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n - 1; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(pick(rng))]);
  }
  return {std::vector<int>(order.begin(), order.begin() + n_train),
          std::vector<int>(order.begin() + n_train, order.end())};
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) {
    throw std::invalid_argument("mse needs equal-length nonempty vectors");
  }
  return (pred - truth).squaredNorm() / static_cast<double>(pred.size());
}

double accuracy(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() == 0) {
    throw std::invalid_argument("accuracy needs equal-length nonempty vectors");
  }
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    const bool valid = (pred[i] == 0.0 || pred[i] == 1.0) &&
                       (truth[i] == 0.0 || truth[i] == 1.0);
    if (!valid) throw std::invalid_argument("accuracy needs 0/1 entries");
    if (pred[i] == truth[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double median_of(const Eigen::VectorXd& values) {
  if (values.size() == 0) throw std::invalid_argument("median of empty vector");
  std::vector<double> copy(values.data(), values.data() + values.size());
  const std::size_t mid = copy.size() / 2;
  std::nth_element(copy.begin(), copy.begin() + mid, copy.end());
  const double upper = copy[mid];
  if (copy.size() % 2 == 1) return upper;
  std::nth_element(copy.begin(), copy.begin() + mid - 1, copy.begin() + mid);
  return 0.5 * (copy[mid - 1] + upper);
}

Eigen::VectorXd dichotomize(const Eigen::VectorXd& values, double median) {
  Eigen::VectorXd out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out[i] = values[i] > median ? 1.0 : 0.0;
  }
  return out;
}

Eigen::VectorXd run_method(Method method, const Dataset& train,
                           const Dataset& test, const BenchConfig& config) {
  FamilyFits fits;
  return run_one(method, fits, train, test, config);
}

std::vector<Eigen::VectorXd> run_methods(const std::vector<Method>& methods,
                                         const Dataset& train,
                                         const Dataset& test,
                                         const BenchConfig& config) {
  FamilyFits fits;
  std::vector<Eigen::VectorXd> preds;
  preds.reserve(methods.size());
  for (Method method : methods) {
    preds.push_back(run_one(method, fits, train, test, config));
  }
  return preds;
}

std::vector<ResultRow> run_simulation(const SimSetup& setup, int n, int p,
                                      TargetKind target,
                                      const BenchConfig& config) {
  if (config.reps < 1) throw std::invalid_argument("reps must be >= 1");
  SimSetup local_setup = setup;
  if (target == TargetKind::binary && !local_setup.median) {
    local_setup.median = estimate_median(local_setup, p, kMedianMcSamples,
                                         mix_seed(config.seed, kMedianStream));
  }

  const Task task =
      target == TargetKind::binary ? Task::classification : Task::regression;
  std::vector<std::vector<ResultRow>> per_rep(static_cast<std::size_t>(config.reps));
  parallel_for(0, config.reps, config.threads, [&](int rep) {
    const std::uint64_t rep_seed =
        mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep));
    auto data_rng = make_rng(rep_seed, kDataStream);
    const SimSample sample =
        target == TargetKind::binary
            ? gen_binary(local_setup, n, p, data_rng, *local_setup.median)
            : gen_continuous(local_setup, n, p, data_rng);
    const Eigen::VectorXd y = target == TargetKind::binary
                                  ? sample.binary_target->cast<double>().eval()
                                  : sample.continuous_target;
    const Dataset full = make_dataset(sample.features, y, task);
    BenchConfig rep_config = config;
    rep_config.task = task;
    per_rep[static_cast<std::size_t>(rep)] =
        evaluate_rep(to_string(setup.name), rep, full, rep_config, rep_seed);
  });

  std::vector<ResultRow> rows;
  rows.reserve(static_cast<std::size_t>(config.reps) * config.methods.size());
  for (auto& rep_rows : per_rep) {
    for (auto& row : rep_rows) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> run_real(const TabularDataset& table,
                                const std::string& target_col, Task task,
                                const BenchConfig& config) {
  if (config.reps < 1) throw std::invalid_argument("reps must be >= 1");
  const SplitColumns columns = split_target(table, target_col);
  const int n_total = table.n();

  std::vector<std::vector<ResultRow>> per_rep(static_cast<std::size_t>(config.reps));
  parallel_for(0, config.reps, config.threads, [&](int rep) {
    const std::uint64_t rep_seed =
        mix_seed(config.seed, 1000 + static_cast<std::uint64_t>(rep));

    Eigen::MatrixXd features = columns.features;
    Eigen::VectorXd target = columns.target;
    if (n_total > kSubsampleCap) {
      auto sub_rng = make_rng(rep_seed, kSubsampleStream);
      std::vector<int> order(static_cast<std::size_t>(n_total));
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < kSubsampleCap; ++i) {
        std::uniform_int_distribution<int> pick(i, n_total - 1);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(pick(sub_rng))]);
      }
      Eigen::MatrixXd sub_features(kSubsampleCap, features.cols());
      Eigen::VectorXd sub_target(kSubsampleCap);
      for (int i = 0; i < kSubsampleCap; ++i) {
        sub_features.row(i) = features.row(order[static_cast<std::size_t>(i)]);
        sub_target[i] = target[order[static_cast<std::size_t>(i)]];
      }
      features = std::move(sub_features);
      target = std::move(sub_target);
    }

    // the binary problem is defined on the working sample, before splitting
    if (task == Task::classification) {
      target = dichotomize(target, median_of(target));
    }

    const Dataset full = make_dataset(features, target, task);
    BenchConfig rep_config = config;
    rep_config.task = task;
    per_rep[static_cast<std::size_t>(rep)] =
        evaluate_rep(table.source_name, rep, full, rep_config, rep_seed);
  });

  std::vector<ResultRow> rows;
  rows.reserve(static_cast<std::size_t>(config.reps) * config.methods.size());
  for (auto& rep_rows : per_rep) {
    for (auto& row : rep_rows) rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<Summary> summarize(const std::vector<ResultRow>& rows) {
  std::vector<Summary> summaries;
  std::vector<std::vector<double>> groups;
  for (const ResultRow& row : rows) {
    std::size_t g = 0;
    for (; g < summaries.size(); ++g) {
      if (summaries[g].setup == row.setup && summaries[g].method == row.method &&
          summaries[g].metric == row.metric) {
        break;
      }
    }
    if (g == summaries.size()) {
      summaries.push_back({row.setup, row.method, row.metric, 0.0, 0.0});
      groups.emplace_back();
    }
    groups[g].push_back(row.value);
  }

  for (std::size_t g = 0; g < summaries.size(); ++g) {
    const std::vector<double>& values = groups[g];
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
    summaries[g].mean = round_sig6(mean);
    summaries[g].sd = round_sig6(sd);
  }
  return summaries;
}

std::string rows_csv_string(const std::vector<ResultRow>& rows) {
  std::string out = "setup,n,p,rep,method,metric,value\n";
  for (const ResultRow& row : rows) {
    out += row.setup;
    out += ',' + std::to_string(row.n);
    out += ',' + std::to_string(row.p);
    out += ',' + std::to_string(row.rep);
    out += ',' + row.method;
    out += ',' + row.metric;
    out += ',' + format_full(row.value);
    out += '\n';
  }
  return out;
}

void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rows_csv_string(rows);
}

std::string summary_json_string(const std::vector<Summary>& summaries) {
  json doc = json::array();
  for (const Summary& s : summaries) {
    doc.push_back({{"setup", s.setup},
                   {"method", s.method},
                   {"metric", s.metric},
                   {"mean", s.mean},
                   {"sd", s.sd}});
  }
  return doc.dump(2) + "\n";
}

void write_summary_json(const std::string& path,
                        const std::vector<Summary>& summaries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << summary_json_string(summaries);
}

}  // namespace treekernel
