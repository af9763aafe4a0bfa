#pragma once

#include "dlasftc/optimizer.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dlasftc {

// Relative distance-to-target metric over one state coordinate:
// sqrt( sum_i (x_i - target)^2 / (x0_i - target)^2 ). Equals sqrt(N) when
// nothing has moved and 0 at the target. Throws std::domain_error when some
// initial offset is exactly zero.
double error_metric(const Eigen::MatrixXd& states, const Eigen::MatrixXd& initial,
                    double target, int coordinate);

// Inputs of the convergence bounds: the coordinated stepsize sequence, the
// curvature constants of the averaged cost, the gradient deviation bound, and
// the initial distance to the optimum.
struct BoundParams {
  std::vector<double> lambda;
  double smoothness = 2.0;
  double strong_convexity = 2.0;
  double grad_deviation = 0.0;
  double initial_distance = 0.0;
};

// max(|1 - lambda_t L|, |1 - lambda_t mu|): per-round contraction factor.
double zeta(const BoundParams& params, int t);

// Tight product-form bound on the distance after round k:
//   (prod_{t=0..k} zeta_t) D0 + sigma sum_{h=0..k} lambda_h prod_{j=h+1..k} zeta_j.
double contraction_bound(const BoundParams& params, int k);

// Conservative geometric-series form using the worst contraction factor and
// stepsize over rounds 1..k:
//   nu^k D0 + lambda_bar sigma (1 - nu^{k+1}) / (1 - nu).
// Never smaller than contraction_bound. nu -> 1 is handled by the k+1 limit.
double conservative_bound(const BoundParams& params, int k);

// Extracts BoundParams from a recorded run; sigma is 0 for runs made with
// deterministic gradients.
BoundParams bound_params(const TrajectoryRecord& record);

struct BoundCheckOptions {
  double slack_sigmas = 3.0;            // statistical slack on the mean bound
  double cumulative_slack = 0.0;        // absolute slack on the mean bound
  double one_step_slack = 1e-12;        // absolute slack of the per-step check
  double one_step_relative_slack = 0.0; // extra slack scaled by previous distance
};

struct BoundCheckRow {
  int k = 0;
  double distance_mean = 0.0;
  double distance_sd = 0.0;
  double bound_tight = 0.0;         // mean over repetitions
  double bound_conservative = 0.0;  // mean over repetitions
  double slack = 0.0;
  double zeta_max = 0.0;            // worst per-rep contraction factor this round
  double grad_error_max = 0.0;      // max over reps of ||e_g|| = lambda * grad noise
  double grad_error_bound = 0.0;    // max over reps of lambda * sigma
  bool mean_bound_violated = false;
  int one_step_violations = 0;
  int grad_error_violations = 0;
};

struct BoundReport {
  std::vector<BoundCheckRow> rows;
  int repetitions = 0;
  int mean_bound_violations = 0;
  int one_step_violations = 0;
  int grad_error_violations = 0;
  int zeta_out_of_range = 0;  // rounds where some rep had zeta >= 1

  bool ok() const {
    return mean_bound_violations == 0 && one_step_violations == 0 &&
           grad_error_violations == 0;
  }
  std::string to_json() const;
  std::string summary_table() const;
};

// Compares the empirical mean distance over repetitions (same graph, data,
// and initialization; different gradient-sampling seeds) against the bounds,
// and checks the per-step contraction and the projection-error bound
// ||e_g|| <= lambda sigma pathwise.
BoundReport bound_check(const std::vector<TrajectoryRecord>& repetitions,
                        const BoundCheckOptions& options = {});

// Round-per-row CSV of one run, headed by a "# "-prefixed JSON metadata line:
// k,lambda,eps,eta_min,eta_max,x_spread,bound_thm1,bound_rem2
std::string trajectory_csv(const TrajectoryRecord& record);

}  // namespace dlasftc
