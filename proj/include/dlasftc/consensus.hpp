#pragma once

#include "dlasftc/graph.hpp"

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>
#include <vector>

namespace dlasftc {

// The observed trace never produced a rank-deficient Hankel matrix: either the
// initial condition fell in the measure-zero bad set or the assumed network
// size bound was too small for the true minimal polynomial degree.
struct DegenerateTraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |x_samples . beta| fell below the denominator tolerance. The all-ones
// initial condition keeps the exact denominator away from zero, so this
// signals numerical trouble rather than theory failure.
struct DegenerateDenominatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One synchronous step of the twin iteration: y' = P y, x' = P x. Each node
// combines its own value with in-neighbor values; column stochasticity
// conserves the totals.
std::pair<Eigen::VectorXd, Eigen::VectorXd> ratio_consensus_step(
    const WeightMatrix& weights, const Eigen::VectorXd& y,
    const Eigen::VectorXd& x);

// Matrix variant used for vector-valued states: every column of y is one
// coordinate's twin iteration sharing the scalar x iteration.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> ratio_consensus_step(
    const WeightMatrix& weights, const Eigen::MatrixXd& y,
    const Eigen::VectorXd& x);

// Iterated maximum propagation: per step each node takes the max of its own
// value and its in-neighbors' values. Reaches the global maximum everywhere
// once steps >= graph diameter.
Eigen::VectorXd max_consensus(const Digraph& g, const Eigen::VectorXd& inputs,
                              int steps);

// Coefficients of the minimal polynomial machinery learned from one node's
// local trace. beta are the coefficients of p(z) = q(z)/(z - 1) where q is
// the minimal annihilating polynomial of the observed sequence; alpha are the
// coefficients of q itself, recovered by convolving beta with (z - 1).
struct MinimalPolyCoeffs {
  int node = 0;
  int degree = 0;          // M: degree of p; beta has M + 1 entries
  Eigen::VectorXd beta;    // last entry normalized to exactly 1
  Eigen::VectorXd alpha;   // M + 2 entries, monic
};

// Learns beta from the kernel of the first rank-deficient Hankel matrix of
// successive differences of a scalar trace y[0..T]. Rank deficiency of the
// (t+1)x(t+1) Hankel is declared when sigma_min <= rank_tol * sigma_max; the
// kernel is the right singular direction of sigma_min rescaled so its last
// entry is 1. A trace whose differences are all (numerically) zero is the
// already-converged special case: degree 0, beta = (1).
// Throws DegenerateTraceError when no rank-deficient Hankel matrix exists in
// the trace.
MinimalPolyCoeffs learn_minimal_poly(const Eigen::VectorXd& trace, int node,
                                     double rank_tol);

// Max over t of |sum_j coeffs[j] * series[t + j]|, normalized by the largest
// term magnitude appearing anywhere in the sums. Zero for an exact linear
// recurrence; used to validate learned coefficients against the trace that
// produced them.
double recurrence_residual(const Eigen::VectorXd& coeffs,
                           const Eigen::VectorXd& series);

// (y_samples . beta) / (x_samples . beta): the exact asymptotic ratio of the
// twin iterations evaluated from the first degree+1 samples only.
double exact_average(const MinimalPolyCoeffs& coeffs,
                     const Eigen::VectorXd& y_samples,
                     const Eigen::VectorXd& x_samples, double den_tol = 1e-12);

// Finite-time exact ratio consensus over a fixed weight matrix.
//
// The first round() call runs the twin iterations for 2n'+2 steps, learns the
// per-node polynomial coefficients from the local traces, precomputes the
// per-node denominators (the x iteration always restarts from all-ones, so
// they never change), and max-consenses the per-node sample horizons M_i + 1
// into the network-wide horizon t_max = max_i(M_i) + 1. Every later round
// runs exactly t_max twin-iteration steps and evaluates the stored ratio
// formula, which yields the exact average of the round's inputs.
class FtercEngine {
 public:
  struct Diagnostics {
    int learning_steps = 0;        // twin-iteration steps spent in round 0
    int ambiguous_kernels = 0;     // nodes whose first defect had kernel dim > 1
    int degenerate_nodes = 0;      // nodes short-circuited with degree 0
  };

  FtercEngine(Digraph graph, WeightMatrix weights, int n_prime,
              double rank_tol = 1e-8, double den_tol = 1e-12);
  // Convenience constructor using the out-degree weighting rule.
  FtercEngine(const Digraph& graph, int n_prime, double rank_tol = 1e-8,
              double den_tol = 1e-12);

  // Averages the rows of inputs (one row per node, one column per state
  // coordinate). Returns one row per node; all rows agree up to roundoff.
  Eigen::MatrixXd round(const Eigen::MatrixXd& inputs);
  // Scalar convenience overload.
  Eigen::VectorXd round(const Eigen::VectorXd& inputs);

  bool learned() const { return learned_; }
  // max_i(M_i) + 1 after the learning round: the exact number of twin
  // iteration steps every later round uses.
  int t_max() const;
  int steps_last_round() const { return steps_last_round_; }
  const MinimalPolyCoeffs& coeffs(int node) const { return coeffs_.at(node); }
  double denominator(int node) const { return denominators_.at(node); }
  const Digraph& graph() const { return graph_; }
  const WeightMatrix& weights() const { return weights_; }
  int n_prime() const { return n_prime_; }
  const Diagnostics& diagnostics() const { return diagnostics_; }

  // Optional trace sink for debugging dumps: one row per (step, node) with
  // the y value (first coordinate) and x value of that step.
  struct TraceRow {
    int t = 0;
    int node = 0;
    double y = 0.0;
    double x = 0.0;
  };
  void set_trace_sink(std::vector<TraceRow>* sink) { trace_sink_ = sink; }

 private:
  Eigen::MatrixXd learning_round(const Eigen::MatrixXd& inputs);
  void record_trace(int t, const Eigen::MatrixXd& y, const Eigen::VectorXd& x);

  Digraph graph_;
  WeightMatrix weights_;
  int n_prime_ = 0;
  double rank_tol_ = 1e-8;
  double den_tol_ = 1e-12;

  bool learned_ = false;
  std::vector<MinimalPolyCoeffs> coeffs_;
  std::vector<double> denominators_;  // x_samples . beta per node
  Eigen::MatrixXd x_hist_;            // x iteration samples from the learning round
  int t_max_ = 0;
  int steps_last_round_ = 0;
  Diagnostics diagnostics_;
  std::vector<TraceRow>* trace_sink_ = nullptr;
};

}  // namespace dlasftc
