#include "dlasftc/problems.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dlasftc {

Dataset::Dataset(RegressionConfig cfg, std::vector<std::vector<double>> chi,
                 std::vector<std::vector<double>> psi)
    : cfg_(cfg), chi_(std::move(chi)), psi_(std::move(psi)) {
  if (cfg_.node_count < 1 ||
      chi_.size() != static_cast<std::size_t>(cfg_.node_count) ||
      psi_.size() != chi_.size()) {
    throw std::invalid_argument("Dataset: node count does not match sample lists");
  }
  for (int i = 0; i < cfg_.node_count; ++i) {
    if (chi_[i].empty() || chi_[i].size() != psi_[i].size()) {
      throw std::invalid_argument("Dataset: every node needs matching, nonempty samples");
    }
  }
  finalize();
}

void Dataset::finalize() {
  node_means_.clear();
  node_means_.reserve(cfg_.node_count);
  optimum_ = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < cfg_.node_count; ++i) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim());
    for (int h = 0; h < samples(i); ++h) mean += sample(i, h);
    mean /= static_cast<double>(samples(i));
    optimum_ += mean;
    node_means_.push_back(std::move(mean));
  }
  optimum_ /= static_cast<double>(cfg_.node_count);
}

Eigen::VectorXd Dataset::sample(int node, int h) const {
  if (cfg_.mode == ProblemMode::Vector) {
    Eigen::VectorXd s(2);
    s << chi(node, h), psi(node, h);
    return s;
  }
  Eigen::VectorXd s(1);
  s << chi(node, h) * psi(node, h) / kChiSecondMoment;
  return s;
}

std::string Dataset::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "node,h,chi,psi\n";
  for (int i = 0; i < cfg_.node_count; ++i) {
    for (int h = 0; h < samples(i); ++h) {
      out << i + 1 << ',' << h + 1 << ',' << chi(i, h) << ',' << psi(i, h) << '\n';
    }
  }
  return out.str();
}

Dataset Dataset::from_csv(std::istream& in, const RegressionConfig& cfg) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::invalid_argument("Dataset::from_csv: empty input");
  }
  std::vector<std::vector<double>> chi(cfg.node_count);
  std::vector<std::vector<double>> psi(cfg.node_count);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::getline(row, field, ',');
    const int node = std::stoi(field) - 1;
    std::getline(row, field, ',');  // sample id, implied by order
    std::getline(row, field, ',');
    const double c = std::stod(field);
    std::getline(row, field, ',');
    const double p = std::stod(field);
    if (node < 0 || node >= cfg.node_count) {
      throw std::invalid_argument("Dataset::from_csv: node id out of range");
    }
    chi[node].push_back(c);
    psi[node].push_back(p);
  }
  return Dataset(cfg, std::move(chi), std::move(psi));
}

Dataset generate_regression_data(const RegressionConfig& cfg, std::uint64_t seed) {
  if (cfg.node_count < 1) {
    throw std::invalid_argument("generate_regression_data: node_count must be >= 1");
  }
  if (cfg.samples_per_node < 1) {
    throw std::invalid_argument("generate_regression_data: samples_per_node must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> feature(-5.0, 5.0);
  std::normal_distribution<double> noise(0.0, cfg.noise_sd);

  std::vector<std::vector<double>> chi(cfg.node_count);
  std::vector<std::vector<double>> psi(cfg.node_count);
  for (int i = 0; i < cfg.node_count; ++i) {
    chi[i].reserve(cfg.samples_per_node);
    psi[i].reserve(cfg.samples_per_node);
    for (int h = 0; h < cfg.samples_per_node; ++h) {
      const double c = feature(rng);
      const double gamma = cfg.noise_sd > 0.0 ? noise(rng) : 0.0;
      chi[i].push_back(c);
      psi[i].push_back(cfg.intercept + cfg.slope * c + gamma);
    }
  }
  return Dataset(cfg, std::move(chi), std::move(psi));
}

double local_cost(const Dataset& data, int node, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (int h = 0; h < data.samples(node); ++h) {
    total += (x - data.sample(node, h)).squaredNorm();
  }
  return total / static_cast<double>(data.samples(node));
}

Eigen::VectorXd local_gradient(const Dataset& data, int node,
                               const Eigen::VectorXd& x) {
  return 2.0 * (x - data.node_mean(node));
}

std::pair<Eigen::VectorXd, int> stochastic_gradient(const Dataset& data, int node,
                                                    const Eigen::VectorXd& x,
                                                    std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, data.samples(node) - 1);
  const int h = pick(rng);
  return {2.0 * (x - data.sample(node, h)), h};
}

ProblemConstants problem_constants(const Dataset& data) {
  ProblemConstants out;
  out.smoothness = 2.0;
  out.strong_convexity = 2.0;
  out.node_smoothness.assign(data.node_count(), 2.0);
  out.node_strong_convexity.assign(data.node_count(), 2.0);
  double worst = 0.0;
  for (int i = 0; i < data.node_count(); ++i) {
    for (int h = 0; h < data.samples(i); ++h) {
      worst = std::max(worst, (data.sample(i, h) - data.node_mean(i)).norm());
    }
  }
  out.grad_deviation = 2.0 * worst;
  return out;
}

}  // namespace dlasftc
