#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace dlasftc {

// How the raw (chi, psi) regression pairs are turned into training samples.
//   Vector: sample = (chi, psi), d = 2; local costs are literal squared
//           distances to the data pairs.
//   Scalar: sample = chi * psi / E[chi^2], d = 1; a per-sample slope target
//           whose population mean is the generating slope, so the optimum of
//           the averaged cost recovers it.
enum class ProblemMode { Vector, Scalar };

struct RegressionConfig {
  int node_count = 20;
  int samples_per_node = 50;
  double intercept = 4.0;  // line offset used by the generator
  double slope = 3.0;      // regression parameter the nodes try to recover
  double noise_sd = 7.0;   // standard deviation of the additive Gaussian noise
  ProblemMode mode = ProblemMode::Scalar;
};

// Second moment of the Uniform[-5, 5] feature distribution, used by the
// scalar-mode slope targets.
inline constexpr double kChiSecondMoment = 25.0 / 3.0;

// Finite-sum local costs: node i holds m_i samples and its cost is the mean
// squared distance of the decision variable to them. Raw (chi, psi) pairs are
// kept regardless of mode so datasets are replayable from CSV.
class Dataset {
 public:
  Dataset(RegressionConfig cfg, std::vector<std::vector<double>> chi,
          std::vector<std::vector<double>> psi);

  int node_count() const { return cfg_.node_count; }
  int samples(int node) const { return static_cast<int>(chi_.at(node).size()); }
  int dim() const { return cfg_.mode == ProblemMode::Vector ? 2 : 1; }
  const RegressionConfig& config() const { return cfg_; }

  double chi(int node, int h) const { return chi_.at(node).at(h); }
  double psi(int node, int h) const { return psi_.at(node).at(h); }
  // Training sample h of a node in the configured mode.
  Eigen::VectorXd sample(int node, int h) const;
  const Eigen::VectorXd& node_mean(int node) const { return node_means_.at(node); }
  // Minimizer of the averaged cost (1/N) sum_i f_i: the mean of node means.
  const Eigen::VectorXd& optimum() const { return optimum_; }

  // CSV with header "node,h,chi,psi", 1-indexed node and sample ids.
  std::string to_csv() const;
  static Dataset from_csv(std::istream& in, const RegressionConfig& cfg);

 private:
  void finalize();

  RegressionConfig cfg_;
  std::vector<std::vector<double>> chi_;
  std::vector<std::vector<double>> psi_;
  std::vector<Eigen::VectorXd> node_means_;
  Eigen::VectorXd optimum_;
};

// chi ~ Uniform[-5, 5], noise ~ Normal(0, noise_sd^2),
// psi = intercept + slope * chi + noise. Deterministic per seed.
Dataset generate_regression_data(const RegressionConfig& cfg, std::uint64_t seed);

// f_i(x) = (1/m_i) sum_h ||x - xi_i^h||^2.
double local_cost(const Dataset& data, int node, const Eigen::VectorXd& x);

// 2 (x - mean of node samples): the exact gradient of the local cost.
Eigen::VectorXd local_gradient(const Dataset& data, int node,
                               const Eigen::VectorXd& x);

// 2 (x - xi_i^h) for a uniformly drawn h; unbiased for the local gradient.
std::pair<Eigen::VectorXd, int> stochastic_gradient(const Dataset& data, int node,
                                                    const Eigen::VectorXd& x,
                                                    std::mt19937_64& rng);

struct ProblemConstants {
  double smoothness = 0.0;        // L of the averaged cost
  double strong_convexity = 0.0;  // mu of the averaged cost
  double grad_deviation = 0.0;    // sigma: bound on ||stochastic - true|| gradients
  std::vector<double> node_smoothness;
  std::vector<double> node_strong_convexity;
};

// For the quadratic instance every per-sample Hessian is 2 I, so all
// smoothness and convexity constants equal 2; the gradient deviation is
// bounded by the largest sample spread: 2 max_i max_h ||xi_i^h - mean_i||.
ProblemConstants problem_constants(const Dataset& data);

}  // namespace dlasftc
