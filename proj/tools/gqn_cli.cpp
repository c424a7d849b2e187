#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "gqn/harness.hpp"

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("gqn");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("GQN_LOG_LEVEL")) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (level == spdlog::level::off && std::string(env) != "off") {
      std::cerr << "warning: unknown GQN_LOG_LEVEL '" << env << "', using info\n";
      level = spdlog::level::info;
    }
  }
  spdlog::set_level(level);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Growing Q-Networks: train, evaluate and compare decoupled discrete critics"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool resume = false;
  auto* train_cmd = app.add_subcommand("train", "Train one seeded run");
  train_cmd->add_option("--config", config_path, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "Run seed")->required();
  train_cmd->add_option("--out", out_dir, "Output directory")->required();
  train_cmd->add_flag("--resume", resume, "Continue from <out>/checkpoint.bin if present");

  std::string checkpoint_path;
  int episodes = 10;
  auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint.bin")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--episodes", episodes, "Evaluation episodes")->check(CLI::PositiveNumber);

  std::string configs_path;
  int workers = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every (config x seed) cell and aggregate");
  sweep_cmd->add_option("--configs", configs_path, "JSON array of run configs")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::string runs_dir;
  std::string baseline_dir;
  std::string radar_out;
  double penalty_reference = 1.0;
  auto* radar_cmd = app.add_subcommand("radar", "Smoothness/return ratios against an unpenalized baseline");
  radar_cmd->add_option("--runs", runs_dir, "Directory searched for checkpoint.bin files")->required();
  radar_cmd->add_option("--baseline", baseline_dir, "Baseline (c_a = 0) run directory")->required();
  radar_cmd->add_option("--out", radar_out, "Output JSON file")->required();
  radar_cmd->add_option("--penalty-reference", penalty_reference, "Coefficient used to measure P for every agent");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      const gqn::RunConfig cfg = gqn::load_run_config(config_path);
      const auto record = gqn::train(cfg, seed, out_dir, {resume, std::nullopt});
      if (!record.rows.empty()) {
        std::cout << "final eval return " << record.rows.back().eval_mean_return << " (" << record.growth_events.size()
                  << " growth events)\n";
      }
    } else if (*eval_cmd) {
      const gqn::Checkpoint c = gqn::load_checkpoint(checkpoint_path);
      const gqn::GqnAgent agent = gqn::agent_from_checkpoint(c);
      const auto ev = gqn::evaluate(agent, c.config.env, c.config.penalty, episodes, c.seed);
      const nlohmann::json out = {{"env", c.config.env},
                                  {"episodes", episodes},
                                  {"active_bins", agent.ladder().active_bins()},
                                  {"mean_return", ev.mean_return},
                                  {"std_return", ev.std_return},
                                  {"returns", ev.returns},
                                  {"R", ev.metrics.R},
                                  {"P", ev.metrics.P},
                                  {"abs_a", ev.metrics.abs_a},
                                  {"abs_da", ev.metrics.abs_da},
                                  {"SM", ev.metrics.SM}};
      std::cout << out.dump(2) << "\n";
    } else if (*sweep_cmd) {
      const auto configs = gqn::load_sweep_configs(configs_path);
      const auto report = gqn::sweep(configs, workers, out_dir);
      int failed = 0;
      for (const auto& c : report["configs"]) {
        for (const auto& cell : c["cells"]) failed += cell["status"] == "ok" ? 0 : 1;
      }
      std::cout << "wrote " << out_dir << "/aggregate.json";
      if (failed > 0) std::cout << " (" << failed << " failed cells)";
      std::cout << "\n";
      return failed > 0 ? 1 : 0;
    } else if (*radar_cmd) {
      const auto report = gqn::radar_report(runs_dir, baseline_dir, penalty_reference);
      gqn::write_text(radar_out, report.dump(2) + "\n");
      std::cout << report["agents"].dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
