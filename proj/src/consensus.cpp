#include "dlasftc/consensus.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dlasftc {

namespace {

void check_size(const WeightMatrix& weights, Eigen::Index rows, const char* what) {
  if (rows != weights.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension does not match weight matrix");
  }
}

Eigen::VectorXd successive_differences(const Eigen::VectorXd& trace) {
  Eigen::VectorXd diffs(trace.size() - 1);
  for (Eigen::Index t = 0; t + 1 < trace.size(); ++t) diffs(t) = trace(t + 1) - trace(t);
  return diffs;
}

// A trace is treated as already converged when its successive differences are
// indistinguishable from accumulated roundoff at the trace's own scale.
bool differences_negligible(const Eigen::VectorXd& diffs, double trace_scale) {
  const double diff_scale = diffs.size() > 0 ? diffs.cwiseAbs().maxCoeff() : 0.0;
  return diff_scale <= 1e-13 * trace_scale;
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> ratio_consensus_step(
    const WeightMatrix& weights, const Eigen::VectorXd& y,
    const Eigen::VectorXd& x) {
  check_size(weights, y.size(), "ratio_consensus_step(y)");
  check_size(weights, x.size(), "ratio_consensus_step(x)");
  return {weights.matrix() * y, weights.matrix() * x};
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> ratio_consensus_step(
    const WeightMatrix& weights, const Eigen::MatrixXd& y,
    const Eigen::VectorXd& x) {
  check_size(weights, y.rows(), "ratio_consensus_step(y)");
  check_size(weights, x.size(), "ratio_consensus_step(x)");
  return {weights.matrix() * y, weights.matrix() * x};
}

Eigen::VectorXd max_consensus(const Digraph& g, const Eigen::VectorXd& inputs,
                              int steps) {
  if (inputs.size() != g.node_count()) {
    throw std::invalid_argument("max_consensus: input size does not match graph");
  }
  if (steps < 0) {
    throw std::invalid_argument("max_consensus: steps must be nonnegative");
  }
  Eigen::VectorXd current = inputs;
  Eigen::VectorXd next = inputs;
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < g.node_count(); ++i) {
      double m = current(i);
      for (int j : g.in_neighbors(i)) m = std::max(m, current(j));
      next(i) = m;
    }
    current.swap(next);
  }
  return current;
}

MinimalPolyCoeffs learn_minimal_poly(const Eigen::VectorXd& trace, int node,
                                     double rank_tol) {
  if (trace.size() < 2) {
    throw std::invalid_argument("learn_minimal_poly: trace needs at least two samples");
  }
  const Eigen::VectorXd diffs = successive_differences(trace);

  MinimalPolyCoeffs out;
  out.node = node;

  const double trace_scale = std::max(trace.cwiseAbs().maxCoeff(), 1e-300);
  if (differences_negligible(diffs, trace_scale)) {
    // Constant trace: already at a fixed point, p(z) = 1.
    out.degree = 0;
    out.beta = Eigen::VectorXd::Ones(1);
    out.alpha = Eigen::VectorXd(2);
    out.alpha << -1.0, 1.0;
    return out;
  }

  // First rank-deficient Hankel matrix of the difference sequence. Size
  // (t+1)x(t+1) needs differences up to index 2t.
  const int t_cap = static_cast<int>((diffs.size() - 1) / 2);
  for (int t = 1; t <= t_cap; ++t) {
    Eigen::MatrixXd hankel(t + 1, t + 1);
    for (int r = 0; r <= t; ++r)
      for (int c = 0; c <= t; ++c) hankel(r, c) = diffs(r + c);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(hankel, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    if (sigma(t) > rank_tol * sigma(0)) continue;

    Eigen::VectorXd kernel = svd.matrixV().col(t);
    if (kernel(t) == 0.0) {
      // Leading coefficient vanished: not a usable monic recurrence here.
      continue;
    }
    out.degree = t;
    out.beta = kernel / kernel(t);
    out.beta(t) = 1.0;
    // q(z) = (z - 1) p(z), recovered by convolution.
    out.alpha = Eigen::VectorXd::Zero(t + 2);
    out.alpha(0) = -out.beta(0);
    for (int j = 1; j <= t; ++j) out.alpha(j) = out.beta(j - 1) - out.beta(j);
    out.alpha(t + 1) = out.beta(t);
    return out;
  }
  throw DegenerateTraceError(
      "learn_minimal_poly: no rank-deficient Hankel matrix found for node " +
      std::to_string(node) + " (degenerate initial condition or n' too small)");
}

double recurrence_residual(const Eigen::VectorXd& coeffs,
                           const Eigen::VectorXd& series) {
  if (coeffs.size() < 1 || series.size() < coeffs.size()) {
    throw std::invalid_argument("recurrence_residual: series shorter than coefficients");
  }
  const double scale =
      coeffs.cwiseAbs().maxCoeff() * std::max(series.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (Eigen::Index t = 0; t + coeffs.size() <= series.size(); ++t) {
    double r = 0.0;
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) r += coeffs(j) * series(t + j);
    worst = std::max(worst, std::abs(r));
  }
  return worst / scale;
}

double exact_average(const MinimalPolyCoeffs& coeffs,
                     const Eigen::VectorXd& y_samples,
                     const Eigen::VectorXd& x_samples, double den_tol) {
  const Eigen::Index need = coeffs.degree + 1;
  if (y_samples.size() < need || x_samples.size() < need) {
    throw std::invalid_argument("exact_average: need degree + 1 samples");
  }
  const double num = y_samples.head(need).dot(coeffs.beta);
  const double den = x_samples.head(need).dot(coeffs.beta);
  if (std::abs(den) < den_tol) {
    throw DegenerateDenominatorError(
        "exact_average: denominator " + std::to_string(den) +
        " below tolerance at node " + std::to_string(coeffs.node));
  }
  return num / den;
}

FtercEngine::FtercEngine(Digraph graph, WeightMatrix weights, int n_prime,
                         double rank_tol, double den_tol)
    : graph_(std::move(graph)),
      weights_(std::move(weights)),
      n_prime_(n_prime),
      rank_tol_(rank_tol),
      den_tol_(den_tol) {
  const int n = graph_.node_count();
  if (weights_.size() != n) {
    throw std::invalid_argument("FtercEngine: weight matrix size does not match graph");
  }
  if (n_prime_ < n) {
    throw std::invalid_argument("FtercEngine: n_prime must be at least the node count");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && weights_(i, j) > 0.0 && !graph_.has_edge(i, j)) {
        throw std::invalid_argument("FtercEngine: positive weight off the graph edges");
      }
    }
  }
}

FtercEngine::FtercEngine(const Digraph& graph, int n_prime, double rank_tol,
                         double den_tol)
    : FtercEngine(graph, default_weights(graph), n_prime, rank_tol, den_tol) {}

void FtercEngine::record_trace(int t, const Eigen::MatrixXd& y,
                               const Eigen::VectorXd& x) {
  if (!trace_sink_) return;
  for (int i = 0; i < graph_.node_count(); ++i) {
    trace_sink_->push_back({t, i, y(i, 0), x(i)});
  }
}

int FtercEngine::t_max() const {
  if (!learned_) {
    throw std::logic_error("FtercEngine::t_max: first round has not run yet");
  }
  return t_max_;
}

Eigen::MatrixXd FtercEngine::round(const Eigen::MatrixXd& inputs) {
  const int n = graph_.node_count();
  if (inputs.rows() != n || inputs.cols() < 1) {
    throw std::invalid_argument("FtercEngine::round: one input row per node required");
  }
  if (!learned_) return learning_round(inputs);

  const Eigen::Index d = inputs.cols();
  // The x iteration restarts from all-ones every round, so its samples (and
  // the per-node denominators computed from them) are exactly the ones stored
  // during the learning round; only the y iteration depends on the inputs.
  std::vector<Eigen::MatrixXd> y_hist;
  y_hist.reserve(t_max_ + 1);
  y_hist.push_back(inputs);
  record_trace(0, inputs, x_hist_.col(0));
  for (int t = 1; t <= t_max_; ++t) {
    y_hist.push_back(weights_.matrix() * y_hist.back());
    record_trace(t, y_hist.back(), x_hist_.col(t));
  }
  steps_last_round_ = t_max_;

  Eigen::MatrixXd result(n, d);
  for (int i = 0; i < n; ++i) {
    const int m = coeffs_[i].degree;
    for (Eigen::Index c = 0; c < d; ++c) {
      double num = 0.0;
      for (int t = 0; t <= m; ++t) num += y_hist[t](i, c) * coeffs_[i].beta(t);
      result(i, c) = num / denominators_[i];
    }
  }
  return result;
}

Eigen::VectorXd FtercEngine::round(const Eigen::VectorXd& inputs) {
  Eigen::MatrixXd m = round(Eigen::MatrixXd(inputs));
  return m.col(0);
}

Eigen::MatrixXd FtercEngine::learning_round(const Eigen::MatrixXd& inputs) {
  const int n = graph_.node_count();
  const Eigen::Index d = inputs.cols();
  const int steps = 2 * n_prime_ + 2;

  std::vector<Eigen::MatrixXd> y_hist;
  y_hist.reserve(steps + 1);
  y_hist.push_back(inputs);
  x_hist_.resize(n, steps + 1);
  x_hist_.col(0) = Eigen::VectorXd::Ones(n);
  record_trace(0, y_hist.back(), x_hist_.col(0));
  for (int t = 1; t <= steps; ++t) {
    y_hist.push_back(weights_.matrix() * y_hist.back());
    x_hist_.col(t) = weights_.matrix() * x_hist_.col(t - 1);
    record_trace(t, y_hist.back(), x_hist_.col(t));
  }
  steps_last_round_ = steps;
  diagnostics_.learning_steps = steps;

  coeffs_.clear();
  coeffs_.reserve(n);
  denominators_.assign(n, 0.0);
  Eigen::VectorXd horizons(n);

  for (int i = 0; i < n; ++i) {
    // Learn from the first coordinate whose trace actually moves; with a
    // vector-valued state all coordinates share the dynamics, so any
    // non-constant one identifies the recurrence.
    MinimalPolyCoeffs learned;
    Eigen::Index used_coord = -1;
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::VectorXd node_trace(steps + 1);
      for (int t = 0; t <= steps; ++t) node_trace(t) = y_hist[t](i, c);
      learned = learn_minimal_poly(node_trace, i, rank_tol_);
      if (learned.degree > 0) {
        used_coord = c;
        break;
      }
    }
    if (used_coord < 0) ++diagnostics_.degenerate_nodes;

    // Flag non-unique kernels: a second singular value under the rank cut
    // means the defect was ambiguous and the smallest direction was chosen.
    if (learned.degree >= 2) {
      Eigen::VectorXd node_trace(steps + 1);
      for (int t = 0; t <= steps; ++t) node_trace(t) = y_hist[t](i, used_coord);
      const Eigen::VectorXd diffs = successive_differences(node_trace);
      Eigen::MatrixXd hankel(learned.degree + 1, learned.degree + 1);
      for (int r = 0; r <= learned.degree; ++r)
        for (int s = 0; s <= learned.degree; ++s) hankel(r, s) = diffs(r + s);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(hankel);
      const auto& sigma = svd.singularValues();
      if (sigma(learned.degree - 1) <= rank_tol_ * sigma(0)) {
        ++diagnostics_.ambiguous_kernels;
      }
    }

    const int m = learned.degree;
    double den = 0.0;
    for (int t = 0; t <= m; ++t) den += x_hist_(i, t) * learned.beta(t);
    if (std::abs(den) < den_tol_) {
      throw DegenerateDenominatorError(
          "FtercEngine: denominator below tolerance at node " + std::to_string(i));
    }
    denominators_[i] = den;
    horizons(i) = static_cast<double>(m + 1);
    coeffs_.push_back(std::move(learned));
  }

  // Sample horizons M_i + 1 are max-consensed over the graph; the network-wide
  // result is the per-round step count t_max = max_i(M_i) + 1.
  const Eigen::VectorXd agreed =
      max_consensus(graph_, horizons, diameter_upper_bound({n_prime_}));
  t_max_ = static_cast<int>(agreed(0));
  learned_ = true;

  Eigen::MatrixXd result(n, d);
  for (int i = 0; i < n; ++i) {
    const int m = coeffs_[i].degree;
    for (Eigen::Index c = 0; c < d; ++c) {
      double num = 0.0;
      for (int t = 0; t <= m; ++t) num += y_hist[t](i, c) * coeffs_[i].beta(t);
      result(i, c) = num / denominators_[i];
    }
  }
  return result;
}

}  // namespace dlasftc
