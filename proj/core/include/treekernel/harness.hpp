#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "treekernel/dataset.hpp"
#include "treekernel/ensemble.hpp"
#include "treekernel/simulate.hpp"
#include "treekernel/table.hpp"

namespace treekernel {

enum class Method { rf, rf_kernel, gbt, gbt_kernel };
enum class TargetKind { continuous, binary };

const char* to_string(Method m);
std::optional<Method> method_from(const std::string& token);

// Optional hyperparameter overrides, mirroring the `--config` JSON keys.
struct HyperOverrides {
  std::optional<int> num_trees;
  std::optional<int> mtry;
  std::optional<int> min_node_size;
  std::optional<int> rounds;
  std::optional<int> max_depth;
  std::optional<double> eta;
  std::optional<double> gamma;
  std::optional<double> lambda_w;
};

// Parses a JSON object restricted to the keys above; unknown keys are an
// error.
HyperOverrides parse_overrides_json(const std::string& text);
HyperOverrides load_overrides(const std::string& path);

struct BenchConfig {
  std::vector<Method> methods = {Method::rf, Method::rf_kernel, Method::gbt,
                                 Method::gbt_kernel};
  int reps = 20;
  double train_fraction = 0.75;
  Task task = Task::regression;
  HyperOverrides hyper;
  bool sensitivity = false;
  bool paper_scale = false;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Concrete fitting parameters for one run: defaults, then sensitivity mode
// (min_node_size -> 10/2, gbt max_depth -> 2), then explicit overrides.
RfParams resolve_rf_params(const BenchConfig& config, Task task, int p);
GbtParams resolve_gbt_params(const BenchConfig& config, Task task);

struct ResultRow {
  std::string setup;
  int n = 0;
  int p = 0;
  int rep = 0;
  std::string method;
  std::string metric;  // "mse" or "accuracy"
  double value = 0.0;
};

// Disjoint cover of {0..n-1} with |train| = round(train_fraction * n),
// sampled uniformly without replacement. Requires n >= 4.
std::pair<std::vector<int>, std::vector<int>> split_indices(
    int n, double train_fraction, std::mt19937_64& rng);

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);
double accuracy(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

double median_of(const Eigen::VectorXd& values);
// value > median -> 1, ties -> 0.
Eigen::VectorXd dichotomize(const Eigen::VectorXd& values, double median);

// Fits the requested method on train and predicts every test row; kernel
// methods build the training Gram matrix, select lambda on it, and predict
// through test-to-train kernel rows. Classification encodes targets as -1/+1
// and thresholds scores at 0.
Eigen::VectorXd run_method(Method method, const Dataset& train,
                           const Dataset& test, const BenchConfig& config);

// Same results as calling run_method per entry, but each ensemble family is
// fitted at most once.
std::vector<Eigen::VectorXd> run_methods(const std::vector<Method>& methods,
                                         const Dataset& train,
                                         const Dataset& test,
                                         const BenchConfig& config);

// One fresh dataset, split, and method sweep per rep; per-rep seeds derive
// from (config.seed, rep) so replicates can run on any thread count with
// identical output.
std::vector<ResultRow> run_simulation(const SimSetup& setup, int n, int p,
                                      TargetKind target,
                                      const BenchConfig& config);

// Real-data protocol: per rep subsample to 2000 rows when larger, dichotomize
// the target at the working-sample median for classification, then split and
// evaluate.
std::vector<ResultRow> run_real(const TabularDataset& table,
                                const std::string& target_col, Task task,
                                const BenchConfig& config);

struct Summary {
  std::string setup;
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
};

// Mean and sample sd over reps, grouped by (setup, method, metric) in
// first-appearance order.
std::vector<Summary> summarize(const std::vector<ResultRow>& rows);

std::string rows_csv_string(const std::vector<ResultRow>& rows);
void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);
std::string summary_json_string(const std::vector<Summary>& summaries);
void write_summary_json(const std::string& path,
                        const std::vector<Summary>& summaries);

}  // namespace treekernel
