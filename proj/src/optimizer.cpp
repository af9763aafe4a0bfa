#include "dlasftc/optimizer.hpp"

#include "dlasftc/analysis.hpp"
#include "dlasftc/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace dlasftc {

namespace {

double max_pairwise_spread(const Eigen::MatrixXd& rows) {
  double spread = 0.0;
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    spread = std::max(spread, rows.col(c).maxCoeff() - rows.col(c).minCoeff());
  }
  return spread;
}

Eigen::MatrixXd draw_initial_states(const RunConfig& cfg, const Dataset& dataset,
                                    double metric_target) {
  const int n = cfg.node_count;
  const int d = dataset.dim();
  const int coord = cfg.metric_coordinate;
  std::mt19937_64 rng(cfg.init_seed);
  std::uniform_real_distribution<double> radius(cfg.init_radius, 2.0 * cfg.init_radius);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> sign(0, 1);

  Eigen::MatrixXd states(n, d);
  for (int i = 0; i < n; ++i) {
    // The error metric divides by the initial offset along the compared
    // coordinate; redraw until that offset is a healthy fraction of the
    // radius.
    for (;;) {
      Eigen::VectorXd direction(d);
      if (d == 1) {
        direction(0) = sign(rng) == 0 ? -1.0 : 1.0;
      } else {
        for (int c = 0; c < d; ++c) direction(c) = gauss(rng);
        const double norm = direction.norm();
        if (norm < 1e-8) continue;
        direction /= norm;
      }
      const Eigen::VectorXd candidate = dataset.optimum() + radius(rng) * direction;
      if (std::abs(candidate(coord) - metric_target) > 1e-3 * cfg.init_radius) {
        states.row(i) = candidate.transpose();
        break;
      }
    }
  }
  return states;
}

}  // namespace

Optimizer::Optimizer(const RunConfig& cfg, Digraph graph, Dataset dataset)
    : cfg_(cfg),
      graph_(std::move(graph)),
      weights_(default_weights(graph_)),
      dataset_(std::move(dataset)) {
  if (cfg_.node_count != graph_.node_count() ||
      cfg_.node_count != dataset_.node_count()) {
    throw std::invalid_argument("Optimizer: config, graph, and dataset disagree on N");
  }
  if (cfg_.metric_coordinate < 0 || cfg_.metric_coordinate >= dataset_.dim()) {
    throw std::invalid_argument("Optimizer: metric_coordinate out of range");
  }
  if (cfg_.mode == CoordinationMode::Fterc) {
    engine_ = std::make_unique<FtercEngine>(graph_, weights_, cfg_.resolved_n_prime());
  }
  optimum_ = dataset_.optimum();
  metric_target_ = dataset_.config().mode == ProblemMode::Scalar
                       ? dataset_.config().slope
                       : optimum_(cfg_.metric_coordinate);
  states_ = draw_initial_states(cfg_, dataset_, metric_target_);
  initial_states_ = states_;

  stepsizes_.reserve(cfg_.node_count);
  node_rngs_.reserve(cfg_.node_count);
  for (int i = 0; i < cfg_.node_count; ++i) {
    stepsizes_.emplace_back(cfg_.stepsize);
    node_rngs_.emplace_back(derive_seed(cfg_.grad_seed, {static_cast<std::uint64_t>(i)}));
  }
}

void Optimizer::set_trace_sink(std::vector<FtercEngine::TraceRow>* sink) {
  if (engine_) engine_->set_trace_sink(sink);
}

Eigen::VectorXd Optimizer::gradient_at(int node, const Eigen::VectorXd& x) {
  if (cfg_.deterministic_gradients) return local_gradient(dataset_, node, x);
  return stochastic_gradient(dataset_, node, x, node_rngs_[node]).first;
}

Eigen::MatrixXd Optimizer::coordinate(const Eigen::MatrixXd& values,
                                      RoundOutcome& outcome) {
  if (engine_) {
    Eigen::MatrixXd out = engine_->round(values);
    outcome.consensus_steps += engine_->steps_last_round();
    return out;
  }
  // Single-gossip baseline: one twin-iteration step, each node keeping its
  // own ratio.
  const auto [y, x] =
      ratio_consensus_step(weights_, values, Eigen::VectorXd::Ones(values.rows()));
  outcome.consensus_steps += 1;
  return y.array().colwise() / x.array();
}

Eigen::VectorXd Optimizer::coordinate_scalar(const Eigen::VectorXd& values,
                                             RoundOutcome& outcome) {
  return coordinate(Eigen::MatrixXd(values), outcome).col(0);
}

void Optimizer::finish_outcome(RoundOutcome& outcome) {
  outcome.post_spread = max_pairwise_spread(outcome.post_coordination);
  outcome.error = error_metric(outcome.post_coordination, initial_states_,
                               metric_target_, cfg_.metric_coordinate);
  const Eigen::VectorXd mean_state =
      outcome.post_coordination.colwise().mean().transpose();
  outcome.distance_to_opt = (mean_state - optimum_).norm();
}

RoundOutcome Optimizer::run_round_zero() {
  if (round_count_ != 0) {
    throw std::logic_error("run_round_zero: already past round 0");
  }
  const auto start = std::chrono::steady_clock::now();
  const int n = cfg_.node_count;
  const int d = dataset_.dim();
  const double lambda0 = cfg_.stepsize.eta0;

  RoundOutcome outcome;
  outcome.round = 0;
  outcome.eta = Eigen::VectorXd::Constant(n, cfg_.stepsize.eta0);
  outcome.lambda = Eigen::VectorXd::Constant(n, lambda0);
  outcome.lambda_mean = lambda0;

  Eigen::MatrixXd gradients(n, d);
  Eigen::MatrixXd pre(n, d);
  Eigen::VectorXd mean_true_grad = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x0 = states_.row(i).transpose();
    const Eigen::VectorXd g = gradient_at(i, x0);
    gradients.row(i) = g.transpose();
    pre.row(i) = (x0 - lambda0 * g).transpose();
    mean_true_grad += local_gradient(dataset_, i, x0);
    stepsizes_[i].init_cache(x0, g);
  }
  mean_true_grad /= static_cast<double>(n);
  outcome.grad_noise =
      (gradients.colwise().mean().transpose() - mean_true_grad).norm();

  outcome.pre_coordination = pre;
  outcome.post_coordination = coordinate(pre, outcome);
  states_ = outcome.post_coordination;
  finish_outcome(outcome);

  round_count_ = 1;
  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

RoundOutcome Optimizer::run_round(int k) {
  if (k < 1 || k != round_count_) {
    throw std::logic_error("run_round: rounds must be executed in order from 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const int n = cfg_.node_count;
  const int d = dataset_.dim();

  RoundOutcome outcome;
  outcome.round = k;

  // Local updates: fresh stochastic gradient, curvature estimate, stepsize
  // proposal. The gradient is evaluated once per node per round and reused by
  // both the proposal and the descent step.
  Eigen::MatrixXd gradients(n, d);
  Eigen::VectorXd eta(n);
  Eigen::VectorXd mean_true_grad = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = states_.row(i).transpose();
    const Eigen::VectorXd g = gradient_at(i, x);
    gradients.row(i) = g.transpose();
    mean_true_grad += local_gradient(dataset_, i, x);
    eta(i) = stepsizes_[i].advance(x, g);
  }
  mean_true_grad /= static_cast<double>(n);
  outcome.eta = eta;
  outcome.grad_noise =
      (gradients.colwise().mean().transpose() - mean_true_grad).norm();

  // Stepsize coordination.
  outcome.lambda = coordinate_scalar(eta, outcome);
  outcome.lambda_mean = outcome.lambda.mean();

  // Descent step with the coordinated stepsize, then state coordination.
  Eigen::MatrixXd pre(n, d);
  for (int i = 0; i < n; ++i) {
    pre.row(i) = states_.row(i) - outcome.lambda(i) * gradients.row(i);
  }
  outcome.pre_coordination = pre;
  outcome.post_coordination = coordinate(pre, outcome);
  states_ = outcome.post_coordination;
  finish_outcome(outcome);

  ++round_count_;
  outcome.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return outcome;
}

TrajectoryRecord run_experiment(const RunConfig& cfg) {
  TrajectoryRecord record;
  record.config = cfg;

  Digraph graph =
      random_strongly_connected(cfg.node_count, cfg.edge_density, cfg.graph_seed);
  Dataset dataset = generate_regression_data(cfg.problem, cfg.data_seed);
  record.graph_hash = topology_hash(graph);
  record.constants = problem_constants(dataset);

  Optimizer optimizer(cfg, std::move(graph), std::move(dataset));
  record.initial_states = optimizer.initial_states();
  record.optimum = optimizer.optimum();
  record.metric_target = optimizer.metric_target();
  record.initial_error =
      error_metric(optimizer.initial_states(), optimizer.initial_states(),
                   optimizer.metric_target(), cfg.metric_coordinate);
  record.initial_distance =
      (optimizer.initial_states().colwise().mean().transpose() - optimizer.optimum())
          .norm();

  try {
    record.rounds.push_back(optimizer.run_round_zero());
    for (int k = 1; k <= cfg.rounds; ++k) {
      record.rounds.push_back(optimizer.run_round(k));
    }
  } catch (const std::exception& e) {
    record.failed = true;
    record.failure = e.what();
  }
  return record;
}

std::string run_meta_json(const TrajectoryRecord& record) {
  const RunConfig& cfg = record.config;
  nlohmann::json meta;
  meta["graph"] = {{"node_count", cfg.node_count},
                   {"edge_density", cfg.edge_density},
                   {"n_prime", cfg.resolved_n_prime()},
                   {"hash", record.graph_hash}};
  meta["problem"] = {
      {"samples_per_node", cfg.problem.samples_per_node},
      {"intercept", cfg.problem.intercept},
      {"slope", cfg.problem.slope},
      {"noise_sd", cfg.problem.noise_sd},
      {"mode", cfg.problem.mode == ProblemMode::Vector ? "vector" : "scalar"}};
  meta["algorithm"] = {
      {"kappa", cfg.stepsize.kappa},
      {"alpha", cfg.stepsize.alpha},
      {"eta0", cfg.stepsize.eta0},
      {"rounds", cfg.rounds},
      {"mode", cfg.mode == CoordinationMode::Fterc ? "fterc" : "gossip"},
      {"deterministic_gradients", cfg.deterministic_gradients}};
  meta["init"] = {{"radius", cfg.init_radius},
                  {"metric_coordinate", cfg.metric_coordinate},
                  {"metric_target", record.metric_target}};
  meta["seeds"] = {{"graph", cfg.graph_seed},
                   {"data", cfg.data_seed},
                   {"init", cfg.init_seed},
                   {"grad", cfg.grad_seed}};
  meta["failed"] = record.failed;
  if (record.failed) meta["failure"] = record.failure;
  return meta.dump();
}

}  // namespace dlasftc
