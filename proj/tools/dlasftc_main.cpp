// Command line front end: `repro` reruns the regression experiment and writes
// plot-ready CSV curves, `consensus-bench` compares finite-time exact
// averaging with plain ratio consensus, and `bound-check` verifies recorded
// trajectories against the convergence bounds.

#include "dlasftc/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<std::string> mode;
  std::optional<std::string> out_dir;
  bool dump_traces = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "flat key = value configuration file");
  cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
  cmd->add_option("--rounds", flags.rounds, "number of rounds K (overrides config)");
  cmd->add_option("--mode", flags.mode, "coordination mode: fterc|gossip|both")
      ->check(CLI::IsMember({"fterc", "gossip", "both"}));
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_flag("--dump-traces", flags.dump_traces,
                "also write the twin-iteration trace CSV");
}

dlasftc::ExperimentConfig resolve_config(const CommonFlags& flags) {
  dlasftc::ExperimentConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = dlasftc::load_config_file(flags.config_path, cfg);
  }
  if (flags.seed) cfg.master_seed = *flags.seed;
  if (flags.rounds) cfg.rounds = *flags.rounds;
  if (flags.mode) cfg.mode = *flags.mode;
  if (flags.out_dir) cfg.out_dir = *flags.out_dir;
  if (flags.dump_traces) cfg.dump_traces = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed learning with automated stepsizes and finite-time coordination"};
  app.require_subcommand(1);

  CommonFlags repro_flags;
  auto* repro = app.add_subcommand(
      "repro", "run the regression experiment and write curve/bound artifacts");
  add_common_flags(repro, repro_flags);

  CommonFlags bench_flags;
  auto* bench = app.add_subcommand(
      "consensus-bench", "finite-time vs asymptotic consensus step counts");
  add_common_flags(bench, bench_flags);

  CommonFlags bound_flags;
  auto* bound = app.add_subcommand(
      "bound-check", "verify repeated runs against the convergence bounds");
  add_common_flags(bound, bound_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (repro->parsed()) {
      const auto cfg = resolve_config(repro_flags);
      const auto result = dlasftc::run_repro(cfg);
      dlasftc::write_repro_artifacts(cfg, result);
      if (result.ran_fterc) {
        std::cout << "fterc final averaged error: "
                  << result.fterc.mean_error.back() << '\n';
      }
      if (result.ran_gossip) {
        std::cout << "gossip final averaged error: "
                  << result.gossip.mean_error.back() << '\n';
      }
      std::cout << "artifacts written to " << cfg.out_dir << '\n';
      if (!result.ok()) {
        std::cerr << "invariant violations:\n";
        for (const auto& v : result.violations) std::cerr << "  " << v << '\n';
        return 1;
      }
      return 0;
    }
    if (bench->parsed()) {
      const auto cfg = resolve_config(bench_flags);
      const auto result = dlasftc::run_consensus_bench(cfg);
      std::filesystem::create_directories(cfg.out_dir);
      const auto path = std::filesystem::path(cfg.out_dir) / "consensus_bench.csv";
      std::ofstream out(path, std::ios::binary);
      out << result.to_csv();
      std::cout << result.to_csv();
      std::cout << "written to " << path.string() << '\n';
      return 0;
    }
    if (bound->parsed()) {
      const auto cfg = resolve_config(bound_flags);
      dlasftc::BoundCheckOptions options;
      options.one_step_slack = 1e-9;
      options.one_step_relative_slack = 1e-12;
      options.cumulative_slack = 1e-9 * std::max(1.0, cfg.init_radius);
      const auto report = dlasftc::run_bound_check(cfg, options);
      std::filesystem::create_directories(cfg.out_dir);
      const auto path = std::filesystem::path(cfg.out_dir) / "bounds.json";
      std::ofstream out(path, std::ios::binary);
      out << report.to_json() << '\n';
      std::cout << report.summary_table();
      std::cout << "written to " << path.string() << '\n';
      return report.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
