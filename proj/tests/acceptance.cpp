// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include "dlasftc/analysis.hpp"
#include "dlasftc/consensus.hpp"
#include "dlasftc/experiments.hpp"
#include "dlasftc/graph.hpp"
#include "dlasftc/optimizer.hpp"
#include "dlasftc/problems.hpp"
#include "dlasftc/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace dlasftc;

namespace {

struct Criterion {
  int id = 0;
  std::string name;
  double time_limit_s = 0.0;
  bool pass = false;
  std::string detail;
  double elapsed_s = 0.0;
};

// Trajectories recorded by earlier criteria, reused by the bound-dominance
// check.
std::vector<TrajectoryRecord> g_recorded;

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> value(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = value(rng);
  return v;
}

ExperimentConfig paper_config() {
  ExperimentConfig cfg;  // defaults are the reference experiment
  cfg.master_seed = 12345;
  return cfg;
}

// ---- criteria 1-3: exactness, finite time, recurrence, on one corpus ----

struct CorpusOutcome {
  int graphs = 0;
  double worst_mean_error = 0.0;
  double worst_spread = 0.0;
  double worst_residual = 0.0;
  int worst_steps_margin = 0;  // min over instances of N - steps
  std::string failure;
  bool ok = true;
};

CorpusOutcome run_corpus() {
  CorpusOutcome out;
  const double densities[] = {0.0, 0.1, 0.25, 0.5, 0.85};
  std::mt19937_64 rng(20240601);
  out.worst_steps_margin = 1 << 30;

  for (int idx = 0; idx < 210; ++idx) {
    const int n = 3 + idx % 28;  // N in {3..30}
    const double density = densities[idx % 5];
    const std::uint64_t seed = derive_seed(777, {static_cast<std::uint64_t>(idx)});
    const Digraph graph = random_strongly_connected(n, density, seed);
    FtercEngine engine(graph, n);

    // Learning round doubles as the first averaging round.
    const Eigen::VectorXd first_inputs = random_vector(n, rng, -5.0, 5.0);
    const Eigen::VectorXd first = engine.round(first_inputs);
    const double first_err =
        (first.array() - first_inputs.mean()).abs().maxCoeff();
    const double first_spread = first.maxCoeff() - first.minCoeff();

    // A later round must be exact after exactly t_max <= N steps.
    const Eigen::VectorXd inputs = random_vector(n, rng, -5.0, 5.0);
    const Eigen::VectorXd outputs = engine.round(inputs);
    const double err = (outputs.array() - inputs.mean()).abs().maxCoeff();
    const double spread = outputs.maxCoeff() - outputs.minCoeff();

    out.worst_mean_error = std::max({out.worst_mean_error, first_err, err});
    out.worst_spread = std::max({out.worst_spread, first_spread, spread});
    if (first_err > 1e-8 || err > 1e-8 || first_spread > 1e-12 || spread > 1e-12) {
      out.ok = false;
      out.failure = "exactness failed on instance " + std::to_string(idx);
      return out;
    }

    if (engine.steps_last_round() != engine.t_max() || engine.t_max() > n) {
      out.ok = false;
      out.failure = "step count " + std::to_string(engine.steps_last_round()) +
                    " (t_max " + std::to_string(engine.t_max()) + ") on N=" +
                    std::to_string(n);
      return out;
    }
    out.worst_steps_margin = std::min(out.worst_steps_margin, n - engine.t_max());

    // Recurrence residual of the learned monic coefficients against the
    // difference trace of the learning inputs.
    const WeightMatrix& w = engine.weights();
    Eigen::VectorXd y = first_inputs;
    Eigen::MatrixXd traces(n, 2 * n + 3);
    traces.col(0) = y;
    for (int t = 1; t <= 2 * n + 2; ++t) {
      y = w.matrix() * y;
      traces.col(t) = y;
    }
    for (int node = 0; node < n; ++node) {
      Eigen::VectorXd diffs(2 * n + 2);
      for (int t = 0; t < 2 * n + 2; ++t)
        diffs(t) = traces(node, t + 1) - traces(node, t);
      const double residual = recurrence_residual(engine.coeffs(node).alpha, diffs);
      out.worst_residual = std::max(out.worst_residual, residual);
      if (residual > 1e-8) {
        out.ok = false;
        out.failure = "recurrence residual " + std::to_string(residual) +
                      " at node " + std::to_string(node) + " of instance " +
                      std::to_string(idx);
        return out;
      }
    }
    ++out.graphs;
  }
  return out;
}

std::string format_double(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2e", v);
  return buffer;
}

// ---- criterion 5 helpers ----

bool envelope_decreasing(const std::vector<double>& curve, double factor,
                         std::string& why) {
  double running_min = curve.front();
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (!std::isfinite(curve[k])) {
      why = "non-finite error at round " + std::to_string(k);
      return false;
    }
    if (curve[k] > factor * running_min) {
      why = "round " + std::to_string(k) + " rose to " + format_double(curve[k]) +
            " against running min " + format_double(running_min);
      return false;
    }
    running_min = std::min(running_min, curve[k]);
  }
  return true;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria;
  const auto run = [&criteria](int id, const std::string& name, double limit,
                               auto&& body) {
    Criterion c;
    c.id = id;
    c.name = name;
    c.time_limit_s = limit;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.pass = body(c.detail);
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.pass && c.elapsed_s > c.time_limit_s) {
      c.pass = false;
      c.detail += " [exceeded " + std::to_string(c.time_limit_s) + "s limit]";
    }
    criteria.push_back(c);
    std::printf("%s  %2d. %-38s %s (%.1fs)\n", c.pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), c.detail.c_str(), c.elapsed_s);
    std::fflush(stdout);
  };

  CorpusOutcome corpus;

  run(1, "finite-time averaging exactness", 30.0, [&](std::string& detail) {
    corpus = run_corpus();
    detail = std::to_string(corpus.graphs) + " graphs, worst error " +
             format_double(corpus.worst_mean_error) + ", worst spread " +
             format_double(corpus.worst_spread);
    if (!corpus.ok) detail += "; " + corpus.failure;
    return corpus.ok && corpus.graphs >= 200;
  });

  run(2, "finite-time step count", 30.0, [&](std::string& detail) {
    detail = "steps = max degree + 1 <= N on all instances (min margin " +
             std::to_string(corpus.worst_steps_margin) + ")";
    return corpus.ok;
  });

  run(3, "minimal polynomial recurrence", 30.0, [&](std::string& detail) {
    detail = "worst relative residual " + format_double(corpus.worst_residual);
    return corpus.ok && corpus.worst_residual <= 1e-8;
  });

  run(4, "stepsize homogeneity by mode", 120.0, [&](std::string& detail) {
    ExperimentConfig cfg = paper_config();
    cfg.rounds = 40;
    double worst_fterc_spread = 0.0;
    int gossip_rounds = 0;
    int gossip_spread_rounds = 0;
    for (int g = 0; g < 3; ++g) {
      const TrajectoryRecord exact =
          run_experiment(make_run_config(cfg, CoordinationMode::Fterc, g, 0));
      if (exact.failed) {
        detail = "fterc run failed: " + exact.failure;
        return false;
      }
      for (const auto& round : exact.rounds) {
        worst_fterc_spread = std::max(
            worst_fterc_spread, round.lambda.maxCoeff() - round.lambda.minCoeff());
      }
      const TrajectoryRecord gossip =
          run_experiment(make_run_config(cfg, CoordinationMode::SingleGossip, g, 0));
      if (gossip.failed) {
        detail = "gossip run failed: " + gossip.failure;
        return false;
      }
      for (std::size_t k = 1; k < gossip.rounds.size(); ++k) {
        ++gossip_rounds;
        if (gossip.rounds[k].lambda.maxCoeff() -
                gossip.rounds[k].lambda.minCoeff() > 0.0)
          ++gossip_spread_rounds;
      }
    }
    detail = "fterc worst spread " + format_double(worst_fterc_spread) +
             "; gossip heterogeneous in " + std::to_string(gossip_spread_rounds) +
             "/" + std::to_string(gossip_rounds) + " rounds";
    return worst_fterc_spread <= 1e-12 &&
           gossip_spread_rounds >= static_cast<int>(0.9 * gossip_rounds);
  });

  run(5, "regression experiment reproduction", 120.0, [&](std::string& detail) {
    const ExperimentConfig cfg = paper_config();
    const ReproResult result = run_repro(cfg);
    if (!result.ok()) {
      detail = "invariant violations: " + result.violations.front();
      return false;
    }
    for (const auto& t : result.fterc.trajectories) g_recorded.push_back(t);
    for (const auto& t : result.gossip.trajectories) g_recorded.push_back(t);

    const auto& fterc = result.fterc.mean_error;
    const auto& gossip = result.gossip.mean_error;
    double plateau = 0.0;
    for (std::size_t k = fterc.size() - 10; k < fterc.size(); ++k)
      plateau = std::max(plateau, fterc[k]);

    std::string why;
    const bool envelope = envelope_decreasing(fterc, 3.0, why);
    const bool below = fterc.back() < gossip.back();
    detail = "plateau " + format_double(plateau) + ", final fterc " +
             format_double(fterc.back()) + " vs gossip " +
             format_double(gossip.back());
    if (!envelope) detail += "; envelope: " + why;
    return envelope && plateau <= 1e-5 && below;
  });

  run(6, "deterministic convergence bound", 10.0, [&](std::string& detail) {
    ExperimentConfig cfg = paper_config();
    cfg.node_count = 10;
    cfg.edge_density = 0.4;
    cfg.samples_per_node = 20;
    cfg.rounds = 40;
    cfg.deterministic_gradients = true;
    cfg.init_radius = 2.0;
    const TrajectoryRecord record =
        run_experiment(make_run_config(cfg, CoordinationMode::Fterc, 0, 0));
    if (record.failed) {
      detail = "run failed: " + record.failure;
      return false;
    }
    g_recorded.push_back(record);

    const BoundParams params = bound_params(record);
    double prev = record.initial_distance;
    double worst_step_gap = 0.0;
    double worst_cumulative_gap = 0.0;
    for (const auto& round : record.rounds) {
      const double z = zeta(params, round.round);
      worst_step_gap =
          std::max(worst_step_gap, round.distance_to_opt - z * prev);
      worst_cumulative_gap =
          std::max(worst_cumulative_gap,
                   round.distance_to_opt - contraction_bound(params, round.round));
      prev = round.distance_to_opt;
    }
    detail = "per-step gap " + format_double(worst_step_gap) +
             " (<= 1e-12), cumulative gap " + format_double(worst_cumulative_gap) +
             " (<= 1e-9)";
    return worst_step_gap <= 1e-12 && worst_cumulative_gap <= 1e-9;
  });

  run(7, "stochastic convergence bound", 120.0, [&](std::string& detail) {
    ExperimentConfig cfg = paper_config();
    cfg.rounds = 30;
    cfg.repetitions = 50;
    std::vector<TrajectoryRecord> reps;
    reps.reserve(cfg.repetitions);
    for (int r = 0; r < cfg.repetitions; ++r) {
      reps.push_back(run_experiment(make_run_config(cfg, CoordinationMode::Fterc, 0, r)));
      if (reps.back().failed) {
        detail = "repetition failed: " + reps.back().failure;
        return false;
      }
    }
    for (const auto& rep : reps) g_recorded.push_back(rep);

    BoundCheckOptions options;
    options.slack_sigmas = 3.0;
    options.one_step_slack = 1e-9;
    options.one_step_relative_slack = 1e-12;
    const BoundReport report = bound_check(reps, options);
    detail = "mean-bound violations " + std::to_string(report.mean_bound_violations) +
             ", pathwise gradient-error violations " +
             std::to_string(report.grad_error_violations) + " over R=50, K=30";
    return report.mean_bound_violations == 0 && report.grad_error_violations == 0;
  });

  run(8, "conservative bound dominates", 30.0, [&](std::string& detail) {
    int rounds_checked = 0;
    for (const auto& record : g_recorded) {
      const BoundParams params = bound_params(record);
      for (const auto& round : record.rounds) {
        if (conservative_bound(params, round.round) <
            contraction_bound(params, round.round)) {
          detail = "violated at round " + std::to_string(round.round);
          return false;
        }
        ++rounds_checked;
      }
    }
    detail = std::to_string(rounds_checked) + " rounds over " +
             std::to_string(g_recorded.size()) + " trajectories";
    return rounds_checked > 0;
  });

  run(9, "gradient correctness", 30.0, [&](std::string& detail) {
    const Dataset data = generate_regression_data(paper_config().regression(), 8080);
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> point(-20.0, 20.0);

    double worst_fd = 0.0;
    const double step = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
      const int node = static_cast<int>(rng() % data.node_count());
      Eigen::VectorXd x(data.dim());
      for (int c = 0; c < data.dim(); ++c) x(c) = point(rng);
      const Eigen::VectorXd grad = local_gradient(data, node, x);
      for (int c = 0; c < data.dim(); ++c) {
        Eigen::VectorXd hi = x, lo = x;
        hi(c) += step;
        lo(c) -= step;
        const double fd =
            (local_cost(data, node, hi) - local_cost(data, node, lo)) / (2 * step);
        worst_fd = std::max(worst_fd, std::abs(fd - grad(c)) /
                                          std::max(1.0, std::abs(grad(c))));
      }
    }

    // Monte Carlo unbiasedness at a fixed point.
    Eigen::VectorXd x(data.dim());
    for (int c = 0; c < data.dim(); ++c) x(c) = 1.0 + c;
    const int node = 3;
    const Eigen::VectorXd full = local_gradient(data, node, x);
    const int draws = 100000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.dim());
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(data.dim());
    for (int d = 0; d < draws; ++d) {
      const Eigen::VectorXd g = stochastic_gradient(data, node, x, rng).first;
      sum += g;
      sumsq += g.cwiseProduct(g);
    }
    double worst_sigmas = 0.0;
    for (int c = 0; c < data.dim(); ++c) {
      const double mean = sum(c) / draws;
      const double sd = std::sqrt(std::max(1e-300, sumsq(c) / draws - mean * mean));
      worst_sigmas = std::max(
          worst_sigmas, std::abs(mean - full(c)) / (sd / std::sqrt(double(draws))));
    }
    detail = "finite-difference mismatch " + format_double(worst_fd) +
             ", Monte Carlo deviation " + format_double(worst_sigmas) + " sigmas";
    return worst_fd <= 1e-6 && worst_sigmas <= 3.0;
  });

  run(10, "byte-identical artifacts per seed", 120.0, [&](std::string& detail) {
    ExperimentConfig cfg = paper_config();
    cfg.node_count = 8;
    cfg.samples_per_node = 10;
    cfg.num_graphs = 2;
    cfg.rounds = 10;
    cfg.repetitions = 3;
    const auto base =
        std::filesystem::temp_directory_path() / "dlasftc_acceptance_determinism";
    std::filesystem::remove_all(base);
    const char* names[] = {"curve_fterc.csv", "curve_gossip.csv", "bounds.json",
                           "dataset.csv", "run_meta.json"};
    std::string mismatch;
    for (int attempt = 0; attempt < 2; ++attempt) {
      cfg.out_dir = (base / ("run" + std::to_string(attempt))).string();
      write_repro_artifacts(cfg, run_repro(cfg));
    }
    for (const char* name : names) {
      std::ifstream a(base / "run0" / name, std::ios::binary);
      std::ifstream b(base / "run1" / name, std::ios::binary);
      std::stringstream sa, sb;
      sa << a.rdbuf();
      sb << b.rdbuf();
      if (sa.str().empty() || sa.str() != sb.str()) {
        mismatch = name;
        break;
      }
    }
    std::filesystem::remove_all(base);
    if (!mismatch.empty()) {
      detail = "mismatch in " + mismatch;
      return false;
    }
    detail = "5 artifact files identical across two runs";
    return true;
  });

  int failures = 0;
  for (const auto& c : criteria) {
    if (!c.pass) ++failures;
  }
  std::printf("%d/%zu acceptance criteria passed\n", int(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
