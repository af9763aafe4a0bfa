#pragma once

#include "dlasftc/consensus.hpp"
#include "dlasftc/graph.hpp"
#include "dlasftc/problems.hpp"
#include "dlasftc/stepsize.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dlasftc {

// How nodes coordinate stepsizes and states each round.
//   Fterc:        finite-time exact averaging; results are node-homogeneous.
//   SingleGossip: a single ratio-consensus step, each node keeping its own
//                 y/x ratio; cheap but leaves heterogeneity across nodes.
enum class CoordinationMode { Fterc, SingleGossip };

struct RunConfig {
  // graph
  int node_count = 20;
  double edge_density = 0.2;
  int n_prime = 0;  // 0 resolves to node_count

  // problem
  RegressionConfig problem;

  // algorithm
  StepsizeConfig stepsize;
  int rounds = 100;  // K: rounds 1..K run after round 0
  CoordinationMode mode = CoordinationMode::Fterc;
  bool deterministic_gradients = false;  // full local gradients (sigma = 0)

  // initialization: nodes start at distance [radius, 2 radius] from the optimum
  double init_radius = 1e7;
  int metric_coordinate = 0;  // coordinate compared by the error metric

  // seeds (derived from one master seed upstream)
  std::uint64_t graph_seed = 1;
  std::uint64_t data_seed = 2;
  std::uint64_t init_seed = 3;
  std::uint64_t grad_seed = 4;

  int resolved_n_prime() const { return n_prime > 0 ? n_prime : node_count; }
};

// Everything recorded about one round: the stepsizes proposed and used, the
// iterates before and after state coordination, and the per-round scalars the
// analysis module consumes.
struct RoundOutcome {
  int round = 0;
  Eigen::VectorXd eta;                 // per-node stepsize proposals
  Eigen::VectorXd lambda;              // per-node coordinated stepsizes
  double lambda_mean = 0.0;
  Eigen::MatrixXd pre_coordination;    // N x d iterates after the gradient step
  Eigen::MatrixXd post_coordination;   // N x d iterates after coordination
  double post_spread = 0.0;            // max pairwise infinity-norm gap of rows
  double error = 0.0;                  // error metric at the post state
  double distance_to_opt = 0.0;        // ||mean post state - optimum||
  double grad_noise = 0.0;             // ||mean sampled grad - mean true grad||
  int consensus_steps = 0;             // twin-iteration steps spent this round
  double wall_seconds = 0.0;
};

struct TrajectoryRecord {
  RunConfig config;
  std::uint64_t graph_hash = 0;
  Eigen::MatrixXd initial_states;  // N x d
  Eigen::VectorXd optimum;
  double metric_target = 0.0;
  double initial_error = 0.0;     // error metric of the initial states
  double initial_distance = 0.0;  // ||mean initial state - optimum||
  ProblemConstants constants;
  std::vector<RoundOutcome> rounds;  // index k = 0..K
  bool failed = false;
  std::string failure;
};

// Config echo, seeds, and graph hash as a JSON object (no timestamps, so
// artifacts stay byte-identical across runs).
std::string run_meta_json(const TrajectoryRecord& record);

// One full algorithm run on one graph/dataset/initialization. Deterministic
// given the seeds in the config. A round that throws marks the record failed
// and stops the loop; everything recorded so far is kept.
TrajectoryRecord run_experiment(const RunConfig& cfg);

// The round-by-round machinery behind run_experiment, exposed so tests and
// the consensus benchmark can drive rounds manually.
class Optimizer {
 public:
  Optimizer(const RunConfig& cfg, Digraph graph, Dataset dataset);

  RoundOutcome run_round_zero();
  RoundOutcome run_round(int k);

  const Digraph& graph() const { return graph_; }
  const Dataset& dataset() const { return dataset_; }
  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::MatrixXd& initial_states() const { return initial_states_; }
  double metric_target() const { return metric_target_; }
  const Eigen::VectorXd& optimum() const { return optimum_; }
  FtercEngine* engine() { return engine_ ? engine_.get() : nullptr; }
  void set_trace_sink(std::vector<FtercEngine::TraceRow>* sink);

 private:
  Eigen::VectorXd gradient_at(int node, const Eigen::VectorXd& x);
  Eigen::MatrixXd coordinate(const Eigen::MatrixXd& values, RoundOutcome& outcome);
  Eigen::VectorXd coordinate_scalar(const Eigen::VectorXd& values,
                                    RoundOutcome& outcome);
  void finish_outcome(RoundOutcome& outcome);

  RunConfig cfg_;
  Digraph graph_;
  WeightMatrix weights_;
  Dataset dataset_;
  std::unique_ptr<FtercEngine> engine_;  // null in SingleGossip mode

  Eigen::MatrixXd states_;          // N x d current iterates
  Eigen::MatrixXd initial_states_;  // N x d
  Eigen::VectorXd optimum_;
  double metric_target_ = 0.0;
  std::vector<StepsizeState> stepsizes_;
  std::vector<std::mt19937_64> node_rngs_;
  int round_count_ = 0;
};

}  // namespace dlasftc
