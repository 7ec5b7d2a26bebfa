#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

namespace treekernel {

enum class SimName { friedman, checkerboard, vanderlaan, meier1, meier2 };
enum class FeatureLaw { iid_uniform01, ar1_gaussian };

// One synthetic generative model: a noiseless signal f over the leading
// min_p features, additive Gaussian noise, and the feature law the signal
// is defined under. The AR(1) law draws rows from N(0, Sigma) with
// Sigma_jk = 0.9^|j-k|.
struct SimSetup {
  SimName name = SimName::friedman;
  int min_p = 5;
  double noise_sd = 1.0;
  FeatureLaw feature_law = FeatureLaw::iid_uniform01;
  std::optional<double> median;  // cached binarization midpoint
};

SimSetup make_setup(SimName name);
const char* to_string(SimName name);
std::optional<SimName> sim_name_from(const std::string& token);

struct SimSample {
  Eigen::MatrixXd features;         // n x p
  Eigen::VectorXd f_values;         // noiseless f(X_i)
  Eigen::VectorXd continuous_target;  // f + eps
  std::optional<Eigen::VectorXi> binary_target;
  std::optional<double> median_used;
};

// Noiseless signal; x must supply at least min_p coordinates.
double f_value(const SimSetup& setup, const Eigen::VectorXd& x);

Eigen::MatrixXd gen_features(const SimSetup& setup, int n, int p,
                             std::mt19937_64& rng);

SimSample gen_continuous(const SimSetup& setup, int n, int p,
                         std::mt19937_64& rng);

// Bernoulli targets with success probability sigmoid(Y_i - median), where
// Y_i is the continuous outcome f + eps.
SimSample gen_binary(const SimSetup& setup, int n, int p, std::mt19937_64& rng,
                     double median);

// Empirical median of the continuous outcome over n_mc fresh draws
// (n_mc >= 1e5). Draws use min_p features; trailing noise columns never
// enter f.
double estimate_median(const SimSetup& setup, int p, std::int64_t n_mc,
                       std::uint64_t seed, int threads = 1);

// 1 - E[max(p, 1-p)] by Monte Carlo over fresh continuous outcomes, with the
// median estimated first from an independent stream of the same size.
double bayes_error(const SimSetup& setup, int p, std::int64_t n_mc,
                   std::uint64_t seed, int threads = 1);

}  // namespace treekernel
