#include "dlasftc/stepsize.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace dlasftc {

std::optional<double> local_lipschitz(const Eigen::VectorXd& x_curr,
                                      const Eigen::VectorXd& x_prev,
                                      const Eigen::VectorXd& g_curr,
                                      const Eigen::VectorXd& g_prev) {
  if (x_curr.size() != x_prev.size() || g_curr.size() != g_prev.size()) {
    throw std::invalid_argument("local_lipschitz: dimension mismatch");
  }
  const double displacement = (x_curr - x_prev).norm();
  if (displacement < 1e-15) return std::nullopt;
  return (g_curr - g_prev).norm() / displacement;
}

double smooth_lipschitz(double l_new, double l_prev, double kappa) {
  if (kappa < 0.0 || kappa >= 1.0) {
    throw std::invalid_argument("smooth_lipschitz: kappa must be in [0, 1)");
  }
  return (1.0 - kappa) * l_new + kappa * l_prev;
}

double propose_stepsize(double eta_prev, double theta_prev, double l_smoothed,
                        double alpha) {
  if (!(eta_prev > 0.0)) {
    throw std::invalid_argument("propose_stepsize: eta_prev must be positive");
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double growth =
      std::isinf(theta_prev) ? inf : std::sqrt(1.0 + theta_prev) * eta_prev;
  const double curvature = l_smoothed > 0.0 ? alpha / l_smoothed : inf;
  if (std::isinf(growth) && std::isinf(curvature)) {
    throw UndefinedStepsizeError(
        "propose_stepsize: both branches infinite (theta = inf and smoothed "
        "estimate = 0)");
  }
  return std::min(growth, curvature);
}

double update_theta(double eta_curr, double eta_prev) {
  if (!(eta_prev > 0.0)) {
    throw std::invalid_argument("update_theta: eta_prev must be positive");
  }
  return eta_curr / eta_prev;
}

StepsizeState::StepsizeState(StepsizeConfig cfg)
    : cfg_(cfg),
      eta_(cfg.eta0),
      theta_(std::numeric_limits<double>::infinity()),
      l_smoothed_(0.0) {
  if (!(cfg_.eta0 > 0.0)) {
    throw std::invalid_argument("StepsizeState: eta0 must be positive");
  }
  if (!(cfg_.alpha > 0.0)) {
    throw std::invalid_argument("StepsizeState: alpha must be positive");
  }
  if (cfg_.kappa < 0.0 || cfg_.kappa >= 1.0) {
    throw std::invalid_argument("StepsizeState: kappa must be in [0, 1)");
  }
}

void StepsizeState::init_cache(Eigen::VectorXd x0, Eigen::VectorXd g0) {
  x_prev_ = std::move(x0);
  g_prev_ = std::move(g0);
  cache_ready_ = true;
}

double StepsizeState::advance(const Eigen::VectorXd& x_curr,
                              const Eigen::VectorXd& g_curr) {
  if (!cache_ready_) {
    throw std::logic_error("StepsizeState::advance: init_cache was not called");
  }
  const auto estimate = local_lipschitz(x_curr, x_prev_, g_curr, g_prev_);
  if (estimate) {
    l_smoothed_ = smooth_lipschitz(*estimate, l_smoothed_, cfg_.kappa);
  }
  const double eta_new = propose_stepsize(eta_, theta_, l_smoothed_, cfg_.alpha);
  theta_ = update_theta(eta_new, eta_);
  eta_ = eta_new;
  x_prev_ = x_curr;
  g_prev_ = g_curr;
  return eta_;
}

}  // namespace dlasftc
