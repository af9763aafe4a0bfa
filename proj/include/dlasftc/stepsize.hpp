#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>

namespace dlasftc {

// Both stepsize branches were infinite: no curvature information yet and no
// finite growth cap. Cannot happen after a genuine first gradient step.
struct UndefinedStepsizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StepsizeConfig {
  double kappa = 0.4;   // smoothing factor in [0, 1)
  double alpha = 0.5;   // curvature safety margin, > 0
  double eta0 = 1e-10;  // initial stepsize proposal
};

// ||g_curr - g_prev|| / ||x_curr - x_prev||. Returns nullopt when the
// displacement is numerically zero (below 1e-15); the caller keeps its
// previous smoothed estimate in that case.
std::optional<double> local_lipschitz(const Eigen::VectorXd& x_curr,
                                      const Eigen::VectorXd& x_prev,
                                      const Eigen::VectorXd& g_curr,
                                      const Eigen::VectorXd& g_prev);

// Exponential smoothing: (1 - kappa) * l_new + kappa * l_prev.
double smooth_lipschitz(double l_new, double l_prev, double kappa);

// min(sqrt(1 + theta_prev) * eta_prev, alpha / l_smoothed). theta_prev may be
// +infinity (first step) and l_smoothed may be zero; each makes its branch
// infinite. Throws UndefinedStepsizeError if both are.
double propose_stepsize(double eta_prev, double theta_prev, double l_smoothed,
                        double alpha);

// eta_curr / eta_prev; requires eta_prev > 0.
double update_theta(double eta_curr, double eta_prev);

// Per-node stepsize automation state. Construction corresponds to round 0:
// eta = eta0, theta = +inf, smoothed estimate = 0, and the round-0 iterate and
// its stochastic gradient are cached via init_cache(). Each later round calls
// advance() once with the current iterate and the gradient evaluated there; it
// runs the estimate / smooth / propose / ratio-update sequence and re-caches.
class StepsizeState {
 public:
  explicit StepsizeState(StepsizeConfig cfg);

  void init_cache(Eigen::VectorXd x0, Eigen::VectorXd g0);
  double advance(const Eigen::VectorXd& x_curr, const Eigen::VectorXd& g_curr);

  double eta() const { return eta_; }
  double theta() const { return theta_; }
  double lipschitz_smoothed() const { return l_smoothed_; }
  const Eigen::VectorXd& cached_iterate() const { return x_prev_; }
  const Eigen::VectorXd& cached_gradient() const { return g_prev_; }

 private:
  StepsizeConfig cfg_;
  double eta_ = 0.0;
  double theta_ = 0.0;
  double l_smoothed_ = 0.0;
  Eigen::VectorXd x_prev_;
  Eigen::VectorXd g_prev_;
  bool cache_ready_ = false;
};

}  // namespace dlasftc
