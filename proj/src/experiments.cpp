#include "dlasftc/experiments.hpp"

#include "dlasftc/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dlasftc {

namespace {

// Fixed worker pool over an index range; results are written by index so the
// merge order never depends on scheduling.
void parallel_for_index(int count, const std::function<void(int)>& fn) {
  if (count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = std::max(1u, std::min<unsigned>(
      std::thread::hardware_concurrency(), static_cast<unsigned>(count)));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: invalid boolean for key '" + key + "'");
}

ProblemMode parse_problem_mode(const std::string& key, const std::string& value) {
  if (value == "vector") return ProblemMode::Vector;
  if (value == "scalar") return ProblemMode::Scalar;
  throw std::invalid_argument("config: invalid mode for key '" + key +
                              "' (expected vector|scalar)");
}

nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["graph"] = {{"node_count", cfg.node_count},
                {"edge_density", cfg.edge_density},
                {"n_prime", cfg.n_prime > 0 ? cfg.n_prime : cfg.node_count},
                {"num_graphs", cfg.num_graphs}};
  j["problem"] = {{"samples_per_node", cfg.samples_per_node},
                  {"intercept", cfg.intercept},
                  {"slope", cfg.slope},
                  {"noise_sd", cfg.noise_sd},
                  {"mode", cfg.problem_mode == ProblemMode::Vector ? "vector" : "scalar"}};
  j["algorithm"] = {{"kappa", cfg.kappa},
                    {"alpha", cfg.alpha},
                    {"eta0", cfg.eta0},
                    {"rounds", cfg.rounds},
                    {"mode", cfg.mode},
                    {"deterministic_gradients", cfg.deterministic_gradients}};
  j["init"] = {{"radius", cfg.init_radius},
               {"metric_coordinate", cfg.metric_coordinate}};
  j["seeds"] = {{"master_seed", cfg.master_seed}, {"repetitions", cfg.repetitions}};
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
}

}  // namespace

RegressionConfig ExperimentConfig::regression() const {
  RegressionConfig r;
  r.node_count = node_count;
  r.samples_per_node = samples_per_node;
  r.intercept = intercept;
  r.slope = slope;
  r.noise_sd = noise_sd;
  r.mode = problem_mode;
  return r;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                  " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "node_count") base.node_count = std::stoi(value);
      else if (key == "edge_density") base.edge_density = std::stod(value);
      else if (key == "n_prime") base.n_prime = std::stoi(value);
      else if (key == "num_graphs") base.num_graphs = std::stoi(value);
      else if (key == "samples_per_node") base.samples_per_node = std::stoi(value);
      else if (key == "intercept") base.intercept = std::stod(value);
      else if (key == "slope") base.slope = std::stod(value);
      else if (key == "noise_sd") base.noise_sd = std::stod(value);
      else if (key == "problem_mode") base.problem_mode = parse_problem_mode(key, value);
      else if (key == "kappa") base.kappa = std::stod(value);
      else if (key == "alpha") base.alpha = std::stod(value);
      else if (key == "eta0") base.eta0 = std::stod(value);
      else if (key == "rounds") base.rounds = std::stoi(value);
      else if (key == "mode") base.mode = value;
      else if (key == "deterministic_gradients")
        base.deterministic_gradients = parse_bool(key, value);
      else if (key == "init_radius") base.init_radius = std::stod(value);
      else if (key == "metric_coordinate") base.metric_coordinate = std::stoi(value);
      else if (key == "master_seed") base.master_seed = std::stoull(value);
      else if (key == "repetitions") base.repetitions = std::stoi(value);
      else if (key == "out_dir") base.out_dir = value;
      else if (key == "dump_traces") base.dump_traces = parse_bool(key, value);
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("config: invalid value for key '" + key + "'");
    }
  }
  if (base.mode != "fterc" && base.mode != "gossip" && base.mode != "both") {
    throw std::invalid_argument("config: invalid value for key 'mode' (fterc|gossip|both)");
  }
  return base;
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open file '" + path + "'");
  }
  return parse_config(in, std::move(base));
}

RunConfig make_run_config(const ExperimentConfig& cfg, CoordinationMode mode,
                          int graph_index, int repetition) {
  RunConfig run;
  run.node_count = cfg.node_count;
  run.edge_density = cfg.edge_density;
  run.n_prime = cfg.n_prime;
  run.problem = cfg.regression();
  run.stepsize = {cfg.kappa, cfg.alpha, cfg.eta0};
  run.rounds = cfg.rounds;
  run.mode = mode;
  run.deterministic_gradients = cfg.deterministic_gradients;
  run.init_radius = cfg.init_radius;
  run.metric_coordinate = cfg.metric_coordinate;
  const auto g = static_cast<std::uint64_t>(graph_index);
  const auto r = static_cast<std::uint64_t>(repetition);
  run.graph_seed = derive_seed(cfg.master_seed, {1, g});
  run.data_seed = derive_seed(cfg.master_seed, {2});  // one dataset per master seed
  run.init_seed = derive_seed(cfg.master_seed, {3, g});
  run.grad_seed = derive_seed(cfg.master_seed, {4, g, r});  // shared across modes
  return run;
}

namespace {

ReproModeResult run_mode(const ExperimentConfig& cfg, CoordinationMode mode,
                         std::vector<std::string>& violations) {
  ReproModeResult result;
  result.mode = mode;
  result.trajectories.resize(cfg.num_graphs);
  parallel_for_index(cfg.num_graphs, [&](int g) {
    result.trajectories[g] = run_experiment(make_run_config(cfg, mode, g, 0));
  });

  const char* mode_name = mode == CoordinationMode::Fterc ? "fterc" : "gossip";
  for (int g = 0; g < cfg.num_graphs; ++g) {
    const auto& record = result.trajectories[g];
    if (record.failed) {
      violations.push_back(std::string(mode_name) + " graph " + std::to_string(g) +
                           " failed: " + record.failure);
      continue;
    }
    if (mode == CoordinationMode::Fterc) {
      const BoundParams params = bound_params(record);
      for (const auto& round : record.rounds) {
        // Coordination homogeneity, scaled by the iterate magnitude.
        const double scale = std::max(
            1.0, round.post_coordination.cwiseAbs().maxCoeff());
        if (round.post_spread > 1e-10 * scale) {
          violations.push_back(std::string(mode_name) + " graph " + std::to_string(g) +
                               " round " + std::to_string(round.round) +
                               ": state spread " + std::to_string(round.post_spread));
        }
        const double lambda_spread =
            round.lambda.maxCoeff() - round.lambda.minCoeff();
        if (lambda_spread > 1e-12) {
          violations.push_back(std::string(mode_name) + " graph " + std::to_string(g) +
                               " round " + std::to_string(round.round) +
                               ": stepsize spread " + std::to_string(lambda_spread));
        }
        if (std::abs(round.lambda_mean - round.eta.mean()) > 1e-10) {
          violations.push_back(std::string(mode_name) + " graph " + std::to_string(g) +
                               " round " + std::to_string(round.round) +
                               ": coordinated stepsize is not the proposal mean");
        }
        if (conservative_bound(params, round.round) <
            contraction_bound(params, round.round)) {
          violations.push_back(std::string(mode_name) + " graph " + std::to_string(g) +
                               " round " + std::to_string(round.round) +
                               ": conservative bound below tight bound");
        }
      }
    }
  }

  // Average the error curves over graphs (every run has rounds 0..K).
  result.mean_error.assign(cfg.rounds + 1, 0.0);
  int complete = 0;
  for (const auto& record : result.trajectories) {
    if (record.failed || record.rounds.size() != result.mean_error.size()) continue;
    ++complete;
    for (std::size_t k = 0; k < record.rounds.size(); ++k) {
      result.mean_error[k] += record.rounds[k].error;
    }
  }
  if (complete > 0) {
    for (auto& e : result.mean_error) e /= complete;
  }
  return result;
}

}  // namespace

ReproResult run_repro(const ExperimentConfig& cfg) {
  ReproResult result;
  if (cfg.mode == "fterc" || cfg.mode == "both") {
    result.fterc = run_mode(cfg, CoordinationMode::Fterc, result.violations);
    result.ran_fterc = true;
  }
  if (cfg.mode == "gossip" || cfg.mode == "both") {
    result.gossip = run_mode(cfg, CoordinationMode::SingleGossip, result.violations);
    result.ran_gossip = true;
  }
  if (result.ran_fterc) {
    // Slacks scale with the iterate magnitude: the exact averaging step is
    // accurate to roundoff relative to the states, which start init_radius
    // away from the optimum.
    BoundCheckOptions options;
    options.one_step_slack = 1e-9;
    options.one_step_relative_slack = 1e-12;
    options.cumulative_slack = 1e-9 * std::max(1.0, cfg.init_radius);
    result.bounds = run_bound_check(cfg, options);
    if (!result.bounds.ok()) {
      result.violations.push_back("bound check reported violations");
    }
  }
  return result;
}

BoundReport run_bound_check(const ExperimentConfig& cfg,
                            const BoundCheckOptions& options) {
  std::vector<TrajectoryRecord> reps(std::max(1, cfg.repetitions));
  parallel_for_index(static_cast<int>(reps.size()), [&](int r) {
    reps[r] = run_experiment(make_run_config(cfg, CoordinationMode::Fterc, 0, r));
  });
  for (const auto& rep : reps) {
    if (rep.failed) {
      throw std::runtime_error("bound check repetition failed: " + rep.failure);
    }
  }
  return bound_check(reps, options);
}

void write_repro_artifacts(const ExperimentConfig& cfg, const ReproResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  auto curve_csv = [](const ReproModeResult& mode_result) {
    std::ostringstream out;
    out.precision(17);
    out << "k,eps\n";
    for (std::size_t k = 0; k < mode_result.mean_error.size(); ++k) {
      out << k << ',' << mode_result.mean_error[k] << '\n';
    }
    return out.str();
  };
  if (result.ran_fterc) {
    write_file(fs::path(cfg.out_dir) / "curve_fterc.csv", curve_csv(result.fterc));
    for (int g = 0; g < cfg.num_graphs; ++g) {
      write_file(fs::path(cfg.out_dir) /
                     ("trajectory_fterc_g" + std::to_string(g) + ".csv"),
                 trajectory_csv(result.fterc.trajectories[g]));
    }
  }
  if (result.ran_gossip) {
    write_file(fs::path(cfg.out_dir) / "curve_gossip.csv", curve_csv(result.gossip));
  }
  if (result.ran_fterc) {
    write_file(fs::path(cfg.out_dir) / "bounds.json", result.bounds.to_json() + "\n");
  }

  const Dataset dataset =
      generate_regression_data(cfg.regression(), derive_seed(cfg.master_seed, {2}));
  write_file(fs::path(cfg.out_dir) / "dataset.csv", dataset.to_csv());

  nlohmann::json meta;
  meta["config"] = config_json(cfg);
  auto hashes = [](const ReproModeResult& mode_result) {
    std::vector<std::uint64_t> h;
    h.reserve(mode_result.trajectories.size());
    for (const auto& t : mode_result.trajectories) h.push_back(t.graph_hash);
    return h;
  };
  if (result.ran_fterc) meta["graph_hashes"] = hashes(result.fterc);
  else if (result.ran_gossip) meta["graph_hashes"] = hashes(result.gossip);
  meta["violations"] = result.violations;
  meta["ok"] = result.ok();
  write_file(fs::path(cfg.out_dir) / "run_meta.json", meta.dump(2) + "\n");

  if (cfg.dump_traces && result.ran_fterc) {
    // Deterministic rerun of the first graph with a trace sink attached.
    std::vector<FtercEngine::TraceRow> rows;
    RunConfig run = make_run_config(cfg, CoordinationMode::Fterc, 0, 0);
    Digraph graph = random_strongly_connected(run.node_count, run.edge_density,
                                              run.graph_seed);
    Dataset data = generate_regression_data(run.problem, run.data_seed);
    Optimizer optimizer(run, std::move(graph), std::move(data));
    optimizer.set_trace_sink(&rows);
    optimizer.run_round_zero();
    for (int k = 1; k <= run.rounds; ++k) optimizer.run_round(k);
    std::ostringstream out;
    out.precision(17);
    out << "t,node,y,x\n";
    for (const auto& row : rows) {
      out << row.t << ',' << row.node + 1 << ',' << row.y << ',' << row.x << '\n';
    }
    write_file(fs::path(cfg.out_dir) / "traces.csv", out.str());
  }
}

std::string ConsensusBenchResult::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "N,graph,steps_fterc_exact,steps_ratio_1e8,fterc_error\n";
  for (const auto& row : rows) {
    out << row.node_count << ',' << row.graph_index << ',' << row.steps_fterc_exact
        << ',' << row.steps_ratio_1e8 << ',' << row.fterc_error << '\n';
  }
  return out.str();
}

ConsensusBenchResult run_consensus_bench(const ExperimentConfig& cfg) {
  ConsensusBenchResult result;
  const int n_max = std::max(2, cfg.node_count);
  for (int n = 2; n <= n_max; ++n) {
    for (int g = 0; g < std::max(1, cfg.num_graphs); ++g) {
      const auto nu = static_cast<std::uint64_t>(n);
      const auto gu = static_cast<std::uint64_t>(g);
      const Digraph graph = random_strongly_connected(
          n, cfg.edge_density, derive_seed(cfg.master_seed, {7, nu, gu}));
      FtercEngine engine(graph, n);

      std::mt19937_64 rng(derive_seed(cfg.master_seed, {8, nu, gu}));
      std::uniform_real_distribution<double> value(0.0, 1.0);
      Eigen::VectorXd warmup(n);
      for (int i = 0; i < n; ++i) warmup(i) = value(rng);
      engine.round(warmup);

      Eigen::VectorXd inputs(n);
      for (int i = 0; i < n; ++i) inputs(i) = value(rng);
      const double mean = inputs.mean();
      const Eigen::VectorXd outputs = engine.round(inputs);

      ConsensusBenchRow row;
      row.node_count = n;
      row.graph_index = g;
      row.steps_fterc_exact = engine.steps_last_round();
      row.fterc_error = (outputs.array() - mean).abs().maxCoeff();

      // Plain ratio consensus on the same inputs until its worst node ratio
      // is within 1e-8 of the mean.
      Eigen::VectorXd y = inputs;
      Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
      int steps = 0;
      const int step_cap = 100000;
      while (steps < step_cap) {
        const double err = ((y.array() / x.array()) - mean).abs().maxCoeff();
        if (err <= 1e-8) break;
        std::tie(y, x) = ratio_consensus_step(engine.weights(), y, x);
        ++steps;
      }
      row.steps_ratio_1e8 = steps;
      result.rows.push_back(row);
    }
  }
  return result;
}

}  // namespace dlasftc
