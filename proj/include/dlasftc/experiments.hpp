#pragma once

#include "dlasftc/analysis.hpp"
#include "dlasftc/optimizer.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dlasftc {

// Top-level experiment configuration. Defaults reproduce the reference
// linear-regression experiment: 20 nodes, 50 samples each, line 4 + 3 chi
// with noise sd 7, kappa 0.4, eta0 1e-10, averaged over 10 random digraphs.
struct ExperimentConfig {
  // graph
  int node_count = 20;
  double edge_density = 0.2;
  int n_prime = 0;  // 0 resolves to node_count
  int num_graphs = 10;

  // problem
  int samples_per_node = 50;
  double intercept = 4.0;
  double slope = 3.0;
  double noise_sd = 7.0;
  ProblemMode problem_mode = ProblemMode::Scalar;

  // algorithm
  double kappa = 0.4;
  double alpha = 0.5;
  double eta0 = 1e-10;
  int rounds = 100;
  std::string mode = "both";  // fterc | gossip | both
  bool deterministic_gradients = false;

  // initialization / metric
  double init_radius = 1e7;
  int metric_coordinate = 0;

  // seeds
  std::uint64_t master_seed = 12345;
  int repetitions = 50;

  // output
  std::string out_dir = "out";
  bool dump_traces = false;

  RegressionConfig regression() const;
};

// Flat "key = value" configuration files ('#' starts a comment, every key
// optional). Throws std::invalid_argument naming the offending key on
// unknown keys or unparsable values.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

// Seed derivation: one dataset per master seed (shared by every graph and
// mode), one graph/initialization per graph index, one gradient-sampling
// stream per (graph, repetition). Modes share streams so their curves are
// comparable run for run.
RunConfig make_run_config(const ExperimentConfig& cfg, CoordinationMode mode,
                          int graph_index, int repetition);

struct ReproModeResult {
  CoordinationMode mode = CoordinationMode::Fterc;
  std::vector<double> mean_error;  // averaged over graphs; index = round
  std::vector<TrajectoryRecord> trajectories;  // one per graph
};

struct ReproResult {
  ReproModeResult fterc;
  ReproModeResult gossip;
  bool ran_fterc = false;
  bool ran_gossip = false;
  BoundReport bounds;  // over `repetitions` fterc reruns of graph 0
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Runs the configured modes over num_graphs digraphs, averages the error
// curves, and checks the runtime invariant suite (coordination homogeneity,
// stepsize-mean identity, bound conservativeness, bound checks).
ReproResult run_repro(const ExperimentConfig& cfg);

// Writes curve_<mode>.csv, bounds.json, dataset.csv, run_meta.json (and
// traces.csv when dump_traces is set) into cfg.out_dir.
void write_repro_artifacts(const ExperimentConfig& cfg, const ReproResult& result);

struct ConsensusBenchRow {
  int node_count = 0;
  int graph_index = 0;
  int steps_fterc_exact = 0;    // twin-iteration steps per post-learning round
  int steps_ratio_1e8 = 0;      // asymptotic iteration count to 1e-8 max error
  double fterc_error = 0.0;     // max |node output - true mean| in that round
};

struct ConsensusBenchResult {
  std::vector<ConsensusBenchRow> rows;
  std::string to_csv() const;
};

// Sweeps N = 2..node_count over num_graphs random digraphs each, comparing
// the exact finite-time step count against plain ratio consensus.
ConsensusBenchResult run_consensus_bench(const ExperimentConfig& cfg);

// R repetitions of graph 0 (shared graph, data, and initialization;
// per-repetition gradient streams), checked against the convergence bounds.
BoundReport run_bound_check(const ExperimentConfig& cfg,
                            const BoundCheckOptions& options = {});

}  // namespace dlasftc
