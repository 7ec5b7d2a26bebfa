#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "treekernel/harness.hpp"
#include "treekernel/kernel.hpp"
#include "treekernel/model_io.hpp"
#include "treekernel/random.hpp"
#include "treekernel/simulate.hpp"
#include "treekernel/table.hpp"

namespace {

using namespace treekernel;

constexpr std::uint64_t kSimulateMedianStream = 0x4d4544;  // distinct from data draws
constexpr std::int64_t kMedianMcSamples = 1000000;

SimName parse_setup(const std::string& token) {
  const auto name = sim_name_from(token);
  if (!name) throw CLI::ValidationError("--setup", "unknown setup: " + token);
  return *name;
}

Task parse_task(const std::string& token) {
  if (token == "regression") return Task::regression;
  if (token == "classification") return Task::classification;
  throw CLI::ValidationError("--task", "expected regression or classification");
}

std::string summary_path_for(const std::string& out_path) {
  const std::string suffix = ".csv";
  if (out_path.size() > suffix.size() &&
      out_path.compare(out_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out_path.substr(0, out_path.size() - suffix.size()) + ".summary.json";
  }
  return out_path + ".summary.json";
}

void write_sim_csv(const std::string& path, const SimSample& sample, bool with_f,
                   bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int n = static_cast<int>(sample.features.rows());
  const int p = static_cast<int>(sample.features.cols());
  for (int j = 0; j < p; ++j) out << 'x' << (j + 1) << ',';
  out << 'y';
  if (with_f) out << ",f";
  out << '\n';
  char buf[48];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", sample.features(i, j));
      out << buf << ',';
    }
    if (binary) {
      out << (*sample.binary_target)[i];
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", sample.continuous_target[i]);
      out << buf;
    }
    if (with_f) {
      std::snprintf(buf, sizeof(buf), "%.17g", sample.f_values[i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

struct BenchCommon {
  int reps = -1;  // -1: pick the scale default
  std::uint64_t seed = 0;
  std::string out_path;
  std::string config_path;
  std::vector<std::string> method_tokens;
  bool sensitivity = false;
  bool paper_scale = false;
  int threads = 0;
};

void add_bench_common(CLI::App* cmd, BenchCommon& common) {
  cmd->add_option("--reps", common.reps, "Replicates (default 20, 200 with --paper-scale)");
  cmd->add_option("--seed", common.seed, "Master seed")->default_val(0);
  cmd->add_option("--out", common.out_path, "Results CSV path")->required();
  cmd->add_option("--config", common.config_path, "Hyperparameter overrides (JSON)");
  cmd->add_option("--methods", common.method_tokens,
                  "Subset of rf,rf_kernel,gbt,gbt_kernel (default all)")
      ->delimiter(',');
  cmd->add_flag("--sensitivity", common.sensitivity,
                "Shallow-tree mode: min node size 10/2, gbt depth 2");
  cmd->add_flag("--paper-scale", common.paper_scale,
                "Full protocol: 200 reps, 500 trees, 100 rounds");
  cmd->add_option("--threads", common.threads, "Worker threads (0 = hardware)")
      ->default_val(0);
}

BenchConfig build_config(const BenchCommon& common, Task task) {
  BenchConfig config;
  config.task = task;
  config.sensitivity = common.sensitivity;
  config.paper_scale = common.paper_scale;
  config.reps = common.reps >= 1 ? common.reps : (common.paper_scale ? 200 : 20);
  config.seed = common.seed;
  config.threads = common.threads;
  if (!common.config_path.empty()) config.hyper = load_overrides(common.config_path);
  if (!common.method_tokens.empty()) {
    config.methods.clear();
    for (const std::string& token : common.method_tokens) {
      const auto method = method_from(token);
      if (!method) throw CLI::ValidationError("--methods", "unknown method: " + token);
      config.methods.push_back(*method);
    }
  }
  return config;
}

void emit_results(const std::string& out_path, const std::vector<ResultRow>& rows) {
  write_rows_csv(out_path, rows);
  write_summary_json(summary_path_for(out_path), summarize(rows));
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Tree-ensemble kernels: random forests, boosted trees, and the "
               "kernel ridge regression models they induce"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Draw one synthetic dataset as CSV");
  std::string sim_setup;
  int sim_n = 0;
  int sim_p = 0;
  std::string sim_target = "continuous";
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  bool sim_with_f = false;
  simulate->add_option("--setup", sim_setup, "friedman|checkerboard|vanderlaan|meier1|meier2")
      ->required();
  simulate->add_option("--n", sim_n, "Rows")->required();
  simulate->add_option("--p", sim_p, "Features")->required();
  simulate->add_option("--target", sim_target, "continuous|binary")
      ->check(CLI::IsMember({"continuous", "binary"}));
  simulate->add_option("--seed", sim_seed, "Seed")->default_val(0);
  simulate->add_option("--out", sim_out, "Output CSV")->required();
  simulate->add_flag("--with-f", sim_with_f, "Append the noiseless f column");
  simulate->callback([&] {
    const SimSetup setup = make_setup(parse_setup(sim_setup));
    auto rng = make_rng(sim_seed);
    if (sim_target == "binary") {
      const double median = estimate_median(setup, sim_p, kMedianMcSamples,
                                            mix_seed(sim_seed, kSimulateMedianStream));
      const SimSample sample = gen_binary(setup, sim_n, sim_p, rng, median);
      write_sim_csv(sim_out, sample, sim_with_f, true);
    } else {
      const SimSample sample = gen_continuous(setup, sim_n, sim_p, rng);
      write_sim_csv(sim_out, sample, sim_with_f, false);
    }
  });

  // bayes-error
  auto* bayes = app.add_subcommand("bayes-error",
                                   "Monte-Carlo Bayes error rate of a binary setup");
  std::string bayes_setup;
  std::int64_t bayes_samples = 1000000;
  std::uint64_t bayes_seed = 0;
  int bayes_threads = 0;
  bayes->add_option("--setup", bayes_setup, "Generative model")->required();
  bayes->add_option("--samples", bayes_samples, "Monte-Carlo draws (>= 1e5)");
  bayes->add_option("--seed", bayes_seed, "Seed")->default_val(0);
  bayes->add_option("--threads", bayes_threads, "Worker threads (0 = hardware)")
      ->default_val(0);
  bayes->callback([&] {
    const SimSetup setup = make_setup(parse_setup(bayes_setup));
    const double error =
        bayes_error(setup, setup.min_p, bayes_samples, bayes_seed, bayes_threads);
    std::printf("%.4f\n", error);
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Fit an ensemble on a CSV and save it as JSON");
  std::string fit_model;
  std::string fit_data;
  std::string fit_target_col;
  std::string fit_task = "regression";
  std::string fit_out;
  std::uint64_t fit_seed = 0;
  std::string fit_config;
  fit->add_option("--model", fit_model, "rf|gbt")
      ->required()
      ->check(CLI::IsMember({"rf", "gbt"}));
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--target-col", fit_target_col, "Target column name")->required();
  fit->add_option("--task", fit_task, "regression|classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  fit->add_option("--out", fit_out, "Model JSON path")->required();
  fit->add_option("--seed", fit_seed, "Seed")->default_val(0);
  fit->add_option("--config", fit_config, "Hyperparameter overrides (JSON)");
  fit->callback([&] {
    const Task task = parse_task(fit_task);
    const TabularDataset table = read_csv(fit_data);
    const SplitColumns columns = split_target(table, fit_target_col);
    Dataset data;
    data.features = columns.features;
    data.target = columns.target;
    data.task = task;

    BenchConfig defaults;  // library-scale defaults for standalone fits
    defaults.paper_scale = true;
    if (!fit_config.empty()) defaults.hyper = load_overrides(fit_config);

    ModelFile model;
    model.feature_names = columns.feature_names;
    model.target_col = fit_target_col;
    if (fit_model == "rf") {
      model.ensemble = fit_rf(data, resolve_rf_params(defaults, task, data.p()),
                              fit_seed);
    } else {
      model.ensemble = fit_gbt(data, resolve_gbt_params(defaults, task), fit_seed);
    }
    save_model(model, fit_out);
  });

  // kernel
  auto* kernel = app.add_subcommand(
      "kernel", "Co-membership kernel matrix of a saved model, written as CSV");
  std::string kernel_model;
  std::string kernel_data;
  std::string kernel_data2;
  std::string kernel_out;
  kernel->add_option("--model", kernel_model, "Model JSON")->required();
  kernel->add_option("--data", kernel_data, "Row points CSV")->required();
  kernel->add_option("--data2", kernel_data2, "Column points CSV (default: --data)");
  kernel->add_option("--out", kernel_out, "Output CSV")->required();
  kernel->callback([&] {
    const ModelFile model = load_model(kernel_model);
    auto features_of = [&](const std::string& path) {
      const TabularDataset table = read_csv(path);
      Eigen::MatrixXd X(table.n(), static_cast<int>(model.feature_names.size()));
      for (std::size_t j = 0; j < model.feature_names.size(); ++j) {
        const int col = column_index(table, model.feature_names[j]);
        if (col < 0) {
          throw std::invalid_argument(path + ": missing model feature column '" +
                                      model.feature_names[j] + "'");
        }
        X.col(static_cast<Eigen::Index>(j)) = table.values.col(col);
      }
      return X;
    };
    const Eigen::MatrixXd a = features_of(kernel_data);
    const KernelMatrix k =
        kernel_data2.empty()
            ? ensemble_kernel(model.ensemble, a)
            : ensemble_kernel(model.ensemble, a, features_of(kernel_data2));
    write_matrix_csv(kernel_out, k.values);
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Repeated train/test comparisons");
  bench->require_subcommand(1);

  auto* bench_sim = bench->add_subcommand("sim", "Benchmark on simulated data");
  std::string bench_setup;
  int bench_n = 0;
  int bench_p = 0;
  std::string bench_target = "continuous";
  BenchCommon sim_common;
  bench_sim->add_option("--setup", bench_setup, "Setup name or 'all'")->required();
  bench_sim->add_option("--n", bench_n, "Rows per dataset")->required();
  bench_sim->add_option("--p", bench_p, "Features per dataset")->required();
  bench_sim->add_option("--target", bench_target, "continuous|binary")
      ->check(CLI::IsMember({"continuous", "binary"}));
  add_bench_common(bench_sim, sim_common);
  bench_sim->callback([&] {
    const TargetKind target = bench_target == "binary" ? TargetKind::binary
                                                       : TargetKind::continuous;
    const Task task = bench_target == "binary" ? Task::classification
                                               : Task::regression;
    const BenchConfig config = build_config(sim_common, task);

    std::vector<SimName> setups;
    if (bench_setup == "all") {
      setups = {SimName::friedman, SimName::checkerboard, SimName::vanderlaan,
                SimName::meier1, SimName::meier2};
    } else {
      setups = {parse_setup(bench_setup)};
    }
    std::vector<ResultRow> rows;
    for (SimName name : setups) {
      const SimSetup setup = make_setup(name);
      std::vector<ResultRow> part =
          run_simulation(setup, bench_n, bench_p, target, config);
      for (auto& row : part) rows.push_back(std::move(row));
    }
    emit_results(sim_common.out_path, rows);
  });

  auto* bench_real = bench->add_subcommand("real", "Benchmark on a CSV dataset");
  std::string real_data;
  std::string real_target_col;
  std::string real_task = "regression";
  BenchCommon real_common;
  bench_real->add_option("--data", real_data, "Dataset CSV")->required();
  bench_real->add_option("--target-col", real_target_col, "Target column name")
      ->required();
  bench_real->add_option("--task", real_task, "regression|classification")
      ->check(CLI::IsMember({"regression", "classification"}));
  add_bench_common(bench_real, real_common);
  bench_real->callback([&] {
    const Task task = parse_task(real_task);
    const BenchConfig config = build_config(real_common, task);
    const TabularDataset table = read_csv(real_data);
    const std::vector<ResultRow> rows = run_real(table, real_target_col, task, config);
    emit_results(real_common.out_path, rows);
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
