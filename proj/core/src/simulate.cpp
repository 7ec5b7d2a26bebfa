#include "treekernel/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "treekernel/parallel.hpp"
#include "treekernel/random.hpp"

namespace treekernel {
namespace {

constexpr double kAr1Rho = 0.9;
constexpr std::int64_t kChunkSize = 1 << 16;

double scaled(double x) { return 2.0 * (x - 0.5); }

void require_p(const SimSetup& setup, Eigen::Index p) {
  if (p < setup.min_p) {
    throw std::invalid_argument(std::string("setup ") + to_string(setup.name) +
                                " needs at least " + std::to_string(setup.min_p) +
                                " features");
  }
}

Eigen::MatrixXd ar1_cholesky(int p) {
  Eigen::MatrixXd cov(p, p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      cov(j, k) = std::pow(kAr1Rho, std::abs(j - k));
    }
  }
  return cov.llt().matrixL();
}

// Fills one feature row in place; `z` is scratch for the Gaussian law.
void draw_row(const SimSetup& setup, const Eigen::MatrixXd& chol,
              std::mt19937_64& rng, Eigen::VectorXd& z, Eigen::VectorXd& row) {
  if (setup.feature_law == FeatureLaw::iid_uniform01) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = unif(rng);
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(rng);
    row.noalias() = chol * z;
  }
}

double stable_sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double median_of_values(std::vector<double>& values) {
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) return upper;
  std::nth_element(values.begin(), values.begin() + mid - 1, values.begin() + mid);
  return 0.5 * (values[mid - 1] + upper);
}

// Evaluates the continuous outcome f + eps over n_mc fresh draws (min_p
// features), chunked with derived per-chunk seeds; the output order is fixed
// regardless of thread count.
std::vector<double> monte_carlo_outcomes(const SimSetup& setup, std::int64_t n_mc,
                                         std::uint64_t seed, int threads) {
  const int p = setup.min_p;
  const Eigen::MatrixXd chol = setup.feature_law == FeatureLaw::ar1_gaussian
                                   ? ar1_cholesky(p)
                                   : Eigen::MatrixXd();
  std::vector<double> values(static_cast<std::size_t>(n_mc));
  const int num_chunks = static_cast<int>((n_mc + kChunkSize - 1) / kChunkSize);
  parallel_for(0, num_chunks, threads, [&](int c) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(c));
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunkSize;
    const std::int64_t end = std::min(begin + kChunkSize, n_mc);
    Eigen::VectorXd row(p);
    Eigen::VectorXd z(p);
    std::normal_distribution<double> noise(0.0, setup.noise_sd);
    for (std::int64_t i = begin; i < end; ++i) {
      draw_row(setup, chol, rng, z, row);
      values[static_cast<std::size_t>(i)] = f_value(setup, row) + noise(rng);
    }
  });
  return values;
}

}  // namespace

SimSetup make_setup(SimName name) {
  const double half_var_sd = std::sqrt(0.5);
  switch (name) {
    case SimName::friedman:
      return {name, 5, 1.0, FeatureLaw::iid_uniform01, std::nullopt};
    case SimName::checkerboard:
      return {name, 20, 1.0, FeatureLaw::ar1_gaussian, std::nullopt};
    case SimName::vanderlaan:
      return {name, 10, half_var_sd, FeatureLaw::iid_uniform01, std::nullopt};
    case SimName::meier1:
      return {name, 4, half_var_sd, FeatureLaw::iid_uniform01, std::nullopt};
    case SimName::meier2:
      return {name, 4, half_var_sd, FeatureLaw::iid_uniform01, std::nullopt};
  }
  throw std::invalid_argument("unknown simulation setup");
}

const char* to_string(SimName name) {
  switch (name) {
    case SimName::friedman: return "friedman";
    case SimName::checkerboard: return "checkerboard";
    case SimName::vanderlaan: return "vanderlaan";
    case SimName::meier1: return "meier1";
    case SimName::meier2: return "meier2";
  }
  return "?";
}

std::optional<SimName> sim_name_from(const std::string& token) {
  for (SimName name : {SimName::friedman, SimName::checkerboard,
                       SimName::vanderlaan, SimName::meier1, SimName::meier2}) {
    if (token == to_string(name)) return name;
  }
  return std::nullopt;
}

double f_value(const SimSetup& setup, const Eigen::VectorXd& x) {
  require_p(setup, x.size());
  constexpr double pi = std::numbers::pi;
  switch (setup.name) {
    case SimName::friedman:
      return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
             10.0 * x[3] + 5.0 * x[4];
    case SimName::checkerboard:
      return 2.0 * x[4] * x[9] + 2.0 * x[14] * x[19];
    case SimName::vanderlaan: {
      const double t1 = scaled(x[0]);
      const double t2 = scaled(x[1]);
      const double t3 = scaled(x[2]);
      const double t6 = scaled(x[5]);
      const double t8 = scaled(x[7]);
      const double t10 = scaled(x[9]);
      return t1 * t2 + t3 * t3 + t8 * t10 - t6 * t6;
    }
    case SimName::meier1: {
      const double t1 = scaled(x[0]);
      const double t2 = scaled(x[1]);
      const double t3 = scaled(x[2]);
      const double t4 = scaled(x[3]);
      return -std::sin(2.0 * t1) + t2 * t2 + t3 - std::exp(t4);
    }
    case SimName::meier2: {
      const double t1 = scaled(x[0]);
      const double t2 = scaled(x[1]);
      const double t3 = scaled(x[2]);
      const double t4 = scaled(x[3]);
      const double c4 = std::cos(2.0 * pi * t4);
      return -t1 + (2.0 * t2 - 1.0) * (2.0 * t2 - 1.0) +
             std::sin(2.0 * pi * t3) / (2.0 - std::sin(2.0 * pi * t4)) +
             2.0 * c4 + 4.0 * c4 * c4;
    }
  }
  throw std::invalid_argument("unknown simulation setup");
}

Eigen::MatrixXd gen_features(const SimSetup& setup, int n, int p,
                             std::mt19937_64& rng) {
  require_p(setup, p);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const Eigen::MatrixXd chol = setup.feature_law == FeatureLaw::ar1_gaussian
                                   ? ar1_cholesky(p)
                                   : Eigen::MatrixXd();
  Eigen::MatrixXd features(n, p);
  Eigen::VectorXd row(p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    draw_row(setup, chol, rng, z, row);
    features.row(i) = row;
  }
  return features;
}

SimSample gen_continuous(const SimSetup& setup, int n, int p,
                         std::mt19937_64& rng) {
  SimSample sample;
  sample.features = gen_features(setup, n, p, rng);
  sample.f_values.resize(n);
  for (int i = 0; i < n; ++i) {
    sample.f_values[i] = f_value(setup, sample.features.row(i).transpose());
  }
  std::normal_distribution<double> noise(0.0, setup.noise_sd);
  sample.continuous_target.resize(n);
  for (int i = 0; i < n; ++i) {
    sample.continuous_target[i] = sample.f_values[i] + noise(rng);
  }
  return sample;
}

SimSample gen_binary(const SimSetup& setup, int n, int p, std::mt19937_64& rng,
                     double median) {
  SimSample sample = gen_continuous(setup, n, p, rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXi labels(n);
  for (int i = 0; i < n; ++i) {
    // the margin uses the continuous outcome, noise included
    const double prob = stable_sigmoid(sample.continuous_target[i] - median);
    labels[i] = unif(rng) < prob ? 1 : 0;
  }
  sample.binary_target = std::move(labels);
  sample.median_used = median;
  return sample;
}

double estimate_median(const SimSetup& setup, int p, std::int64_t n_mc,
                       std::uint64_t seed, int threads) {
  require_p(setup, p);
  if (n_mc < 100000) throw std::invalid_argument("estimate_median needs n_mc >= 1e5");
  std::vector<double> values = monte_carlo_outcomes(setup, n_mc, seed, threads);
  return median_of_values(values);
}

double bayes_error(const SimSetup& setup, int p, std::int64_t n_mc,
                   std::uint64_t seed, int threads) {
  require_p(setup, p);
  if (n_mc < 100000) throw std::invalid_argument("bayes_error needs n_mc >= 1e5");
  const double median =
      estimate_median(setup, p, n_mc, mix_seed(seed, 0x6d656469), threads);

  const std::vector<double> values =
      monte_carlo_outcomes(setup, n_mc, mix_seed(seed, 0x62617965), threads);
  // reduce per chunk, then combine in chunk order
  double total = 0.0;
  for (std::size_t begin = 0; begin < values.size();
       begin += static_cast<std::size_t>(kChunkSize)) {
    const std::size_t end =
        std::min(begin + static_cast<std::size_t>(kChunkSize), values.size());
    double chunk_sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      chunk_sum += stable_sigmoid(std::abs(values[i] - median));
    }
    total += chunk_sum;
  }
  return 1.0 - total / static_cast<double>(n_mc);
}

}  // namespace treekernel
