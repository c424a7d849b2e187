#pragma once

// Seeded train / evaluate / sweep / radar drivers and their file outputs.
//
// Output directory of one run:
//   config.json         echoed, fully expanded configuration
//   run.csv             one row per evaluation (schema v1, see kRunCsvHeader)
//   growth_events.csv   one row per resolution change
//   checkpoint.bin      CBOR checkpoint, enough to resume bit-exactly

#include <fmt/core.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gqn/action_space.hpp"
#include "gqn/agent.hpp"
#include "gqn/config.hpp"
#include "gqn/envs.hpp"
#include "gqn/error.hpp"
#include "gqn/metrics.hpp"
#include "gqn/scheduler.hpp"

namespace gqn {

namespace fs = std::filesystem;

inline constexpr const char* kRunCsvVersion = "# gqn run.csv v1";
inline constexpr const char* kRunCsvHeader =
    "env_steps,episode,eval_mean_return,eval_std,active_bins,epsilon,loss,R,P,abs_a,abs_da,SM";
inline constexpr const char* kGrowthCsvHeader = "env_steps,episode,old_bins,new_bins,trigger";

struct EvalRow {
  std::int64_t env_steps = 0;
  std::int64_t episode = 0;  // training episodes completed
  double eval_mean_return = 0.0;
  double eval_std = 0.0;
  int active_bins = 0;
  double epsilon = 0.0;
  double loss = std::nan("");
  EpisodeMetrics metrics;
};

struct GrowthEvent {
  std::int64_t env_steps = 0;
  std::int64_t episode = 0;
  int old_bins = 0;
  int new_bins = 0;
  std::string trigger;
};

struct RunRecord {
  std::vector<EvalRow> rows;
  std::vector<GrowthEvent> growth_events;
  std::string checkpoint_path;
  std::int64_t executed_actions = 0;
  std::int64_t masked_actions = 0;  // independent re-check of every executed action; must stay 0
};

struct EvalResult {
  double mean_return = 0.0;
  double std_return = 0.0;
  std::vector<double> returns;
  std::vector<EpisodeTrace> traces;
  EpisodeMetrics metrics;  // averaged over episodes
};

struct TrainOptions {
  bool resume = false;
  // Stop (as if killed) once this many episodes are complete; for resume tests.
  std::optional<std::int64_t> stop_after_episodes;
};

// ---- seeding ----

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t run_seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(run_seed) ^ stream) ^ index);
}

enum SeedStream : std::uint64_t { kAgentStream = 1, kTrainEnvStream = 2, kEvalEnvStream = 3 };

// ---- formatting ----

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

inline std::string csv_row(const EvalRow& r) {
  const auto& m = r.metrics;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}", r.env_steps, r.episode, format_number(r.eval_mean_return),
                     format_number(r.eval_std), r.active_bins, format_number(r.epsilon), format_number(r.loss),
                     format_number(m.R), format_number(m.P), format_number(m.abs_a), format_number(m.abs_da),
                     format_number(m.SM));
}

inline std::string csv_row(const GrowthEvent& g) {
  return fmt::format("{},{},{},{},{}", g.env_steps, g.episode, g.old_bins, g.new_bins, g.trigger);
}

inline nlohmann::json row_to_json(const EvalRow& r) {
  const auto& m = r.metrics;
  return {r.env_steps, r.episode, r.eval_mean_return, r.eval_std, r.active_bins, r.epsilon,
          std::isnan(r.loss) ? nlohmann::json(nullptr) : nlohmann::json(r.loss),
          m.R, m.P, m.abs_a, m.abs_da, m.SM};
}

inline EvalRow row_from_json(const nlohmann::json& j) {
  EvalRow r;
  r.env_steps = j.at(0).get<std::int64_t>();
  r.episode = j.at(1).get<std::int64_t>();
  r.eval_mean_return = j.at(2).get<double>();
  r.eval_std = j.at(3).get<double>();
  r.active_bins = j.at(4).get<int>();
  r.epsilon = j.at(5).get<double>();
  r.loss = j.at(6).is_null() ? std::nan("") : j.at(6).get<double>();
  r.metrics = {j.at(7).get<double>(), j.at(8).get<double>(), j.at(9).get<double>(), j.at(10).get<double>(),
               j.at(11).get<double>()};
  return r;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

inline void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  out << line << '\n';
}

inline void write_run_csv(const fs::path& path, const std::vector<EvalRow>& rows) {
  std::string text = std::string(kRunCsvVersion) + "\n" + kRunCsvHeader + "\n";
  for (const auto& r : rows) text += csv_row(r) + "\n";
  write_text(path, text);
}

inline void write_growth_csv(const fs::path& path, const std::vector<GrowthEvent>& events) {
  std::string text = std::string(kGrowthCsvHeader) + "\n";
  for (const auto& g : events) text += csv_row(g) + "\n";
  write_text(path, text);
}

// ---- construction ----

inline GqnAgent make_agent(const RunConfig& cfg, std::uint64_t seed) {
  const auto task = make_task(cfg.env);
  const EnvSpec& spec = task->spec();
  Hyperparams h = cfg.hyper;
  const double total_steps = static_cast<double>(cfg.episodes) * spec.horizon;
  h.eps_decay_steps = static_cast<std::int64_t>(std::llround(cfg.eps_decay_fraction * total_steps));
  h.per_beta_steps = static_cast<std::int64_t>(std::llround(cfg.per_beta_fraction * total_steps));
  auto ladder = ResolutionLadder::build(cfg.min_bins, cfg.max_bins, spec.action_dim);
  return GqnAgent(spec.obs_dim, std::move(ladder), std::move(h), derive_seed(seed, kAgentStream, 0));
}

// ---- evaluation ----

// Greedy (epsilon = 0) rollouts on freshly seeded environments.
inline EvalResult evaluate(const GqnAgent& agent, const std::string& env_id, double penalty, int episodes,
                           std::uint64_t run_seed) {
  if (episodes < 1) throw ConfigError("evaluate: need at least one episode");
  EvalResult res;
  std::vector<EpisodeMetrics> per_episode;
  for (int e = 0; e < episodes; ++e) {
    auto env = make_env(env_id, penalty);
    if (env->spec().action_dim != agent.action_dim()) throw ConfigError("evaluate: environment/agent action mismatch");
    if (env->spec().obs_dim != agent.online().input_dim()) throw ConfigError("evaluate: environment/agent observation mismatch");
    EpisodeTrace trace;
    trace.dt = env->spec().dt;
    Vector obs = env->reset(derive_seed(run_seed, kEvalEnvStream, static_cast<std::uint64_t>(e)));
    double ret = 0.0;
    for (bool done = false; !done;) {
      const auto bins = agent.greedy_action(obs);
      const auto action = agent.ladder().decode(bins);
      const StepResult step = env->step(action);
      trace.actions.push_back(action);
      trace.raw_rewards.push_back(step.raw_reward);
      trace.rewards.push_back(step.reward);
      ret += step.reward;
      obs = step.obs;
      done = step.terminal;
    }
    res.returns.push_back(ret);
    per_episode.push_back(episode_metrics(trace));
    res.traces.push_back(std::move(trace));
  }
  double sum = 0.0;
  for (double r : res.returns) sum += r;
  res.mean_return = sum / episodes;
  double ss = 0.0;
  for (double r : res.returns) ss += (r - res.mean_return) * (r - res.mean_return);
  res.std_return = std::sqrt(ss / episodes);
  res.metrics = mean_metrics(per_episode);
  return res;
}

// ---- checkpoints ----

struct Checkpoint {
  RunConfig config;
  std::uint64_t seed = 0;
  std::int64_t next_episode = 0;
  nlohmann::json agent_state;
  nlohmann::json scheduler_state;
  std::vector<EvalRow> rows;
  std::vector<GrowthEvent> growth_events;
};

inline void save_checkpoint(const fs::path& path, const Checkpoint& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : c.rows) rows.push_back(row_to_json(r));
  nlohmann::json growth = nlohmann::json::array();
  for (const auto& g : c.growth_events) growth.push_back({g.env_steps, g.episode, g.old_bins, g.new_bins, g.trigger});
  const nlohmann::json j = {{"format", "gqn-checkpoint"},
                            {"version", 1},
                            {"config", run_config_to_json(c.config)},
                            {"seed", c.seed},
                            {"next_episode", c.next_episode},
                            {"agent", c.agent_state},
                            {"scheduler", c.scheduler_state},
                            {"rows", std::move(rows)},
                            {"growth_events", std::move(growth)}};
  const std::vector<std::uint8_t> bytes = nlohmann::json::to_cbor(j);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  fs::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::from_cbor(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "gqn-checkpoint" || j.value("version", 0) != 1) {
    throw ConfigError(path.string() + " is not a version 1 gqn checkpoint");
  }
  Checkpoint c;
  c.config = parse_run_config(j.at("config"));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.next_episode = j.at("next_episode").get<std::int64_t>();
  c.agent_state = j.at("agent");
  c.scheduler_state = j.at("scheduler");
  for (const auto& r : j.at("rows")) c.rows.push_back(row_from_json(r));
  for (const auto& g : j.at("growth_events")) {
    c.growth_events.push_back({g.at(0).get<std::int64_t>(), g.at(1).get<std::int64_t>(), g.at(2).get<int>(),
                               g.at(3).get<int>(), g.at(4).get<std::string>()});
  }
  return c;
}

// Rebuilds the agent stored in a checkpoint.
inline GqnAgent agent_from_checkpoint(const Checkpoint& c) {
  GqnAgent agent = make_agent(c.config, c.seed);
  agent.load_state(c.agent_state);
  return agent;
}

// ---- training ----

inline RunRecord train(const RunConfig& cfg, std::uint64_t seed, const std::optional<fs::path>& out_dir = std::nullopt,
                       const TrainOptions& options = {}) {
  auto env = make_env(cfg.env, cfg.penalty);
  GqnAgent agent = make_agent(cfg, seed);
  AdaptiveGrowth adaptive(cfg.growth_window, cfg.growth_cooldown);
  RunRecord record;
  std::int64_t start_episode = 0;

  fs::path ckpt_path;
  if (out_dir) {
    fs::create_directories(*out_dir);
    ckpt_path = *out_dir / "checkpoint.bin";
    record.checkpoint_path = ckpt_path.string();
    if (options.resume && fs::exists(ckpt_path)) {
      Checkpoint c = load_checkpoint(ckpt_path);
      if (run_config_to_json(c.config) != run_config_to_json(cfg) || c.seed != seed) {
        throw ConfigError("resume: checkpoint was written for a different config or seed");
      }
      agent.load_state(c.agent_state);
      adaptive.load(c.scheduler_state);
      start_episode = c.next_episode;
      record.rows = std::move(c.rows);
      record.growth_events = std::move(c.growth_events);
      spdlog::info("{} seed {}: resuming at episode {}", cfg.name, seed, start_episode);
    }
    write_text(*out_dir / "config.json", run_config_to_json(cfg).dump(2) + "\n");
    write_run_csv(*out_dir / "run.csv", record.rows);
    write_growth_csv(*out_dir / "growth_events.csv", record.growth_events);
  }

  auto log_growth = [&](std::int64_t episode, int old_bins, const char* trigger) {
    GrowthEvent g{agent.env_steps(), episode, old_bins, agent.ladder().active_bins(), trigger};
    spdlog::info("{} seed {}: grow {} -> {} bins ({}) at episode {}", cfg.name, seed, g.old_bins, g.new_bins, trigger,
                 episode);
    if (out_dir) append_line(*out_dir / "growth_events.csv", csv_row(g));
    record.growth_events.push_back(std::move(g));
  };

  auto write_checkpoint = [&](std::int64_t next_episode) {
    if (!out_dir) return;
    save_checkpoint(ckpt_path, {cfg, seed, next_episode, agent.state_to_json(), adaptive.to_json(), record.rows,
                                record.growth_events});
  };

  double loss_sum = 0.0;
  std::int64_t loss_count = 0;
  int evals_since_checkpoint = 0;
  const int num_levels = agent.ladder().num_levels();

  for (std::int64_t episode = start_episode; episode < cfg.episodes; ++episode) {
    if (cfg.growth == GrowthMode::linear) {
      const int target_level = linear_level(episode, cfg.episodes, num_levels);
      while (agent.ladder().active_level() < target_level) {
        const int old_bins = agent.ladder().active_bins();
        agent.grow();
        log_growth(episode, old_bins, "linear");
      }
    }

    Vector obs = env->reset(derive_seed(seed, kTrainEnvStream, static_cast<std::uint64_t>(episode)));
    for (bool done = false; !done;) {
      auto bins = agent.select_action(obs, agent.epsilon());
      for (int b : bins) {
        if (!agent.ladder().is_active(b)) ++record.masked_actions;
      }
      const auto action = agent.ladder().decode(bins);
      const StepResult step = env->step(action);
      ++record.executed_actions;
      std::optional<TrainDiagnostics> diag;
      try {
        diag = agent.observe({obs, std::move(bins), step.reward, step.obs, step.terminal});
      } catch (const DivergenceError& e) {
        spdlog::error("{} seed {}: diverged at env step {}: {}", cfg.name, seed, agent.env_steps(), e.what());
        throw DivergenceError(fmt::format("{} seed {} diverged in episode {}: {}", cfg.name, seed, episode, e.what()));
      }
      if (diag) {
        loss_sum += diag->loss;
        ++loss_count;
      }
      obs = step.obs;
      done = step.terminal;
    }

    const std::int64_t completed = episode + 1;
    if (completed % cfg.eval_every == 0 || completed == cfg.episodes) {
      const EvalResult ev = evaluate(agent, cfg.env, cfg.penalty, cfg.eval_episodes, seed);
      EvalRow row;
      row.env_steps = agent.env_steps();
      row.episode = completed;
      row.eval_mean_return = ev.mean_return;
      row.eval_std = ev.std_return;
      row.active_bins = agent.ladder().active_bins();
      row.epsilon = agent.epsilon();
      row.loss = loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : std::nan("");
      row.metrics = ev.metrics;
      loss_sum = 0.0;
      loss_count = 0;
      record.rows.push_back(row);
      if (out_dir) append_line(*out_dir / "run.csv", csv_row(row));
      spdlog::info("{} seed {}: episode {} steps {} eval {:.2f} +- {:.2f} bins {}", cfg.name, seed, completed,
                   row.env_steps, row.eval_mean_return, row.eval_std, row.active_bins);

      if (cfg.growth == GrowthMode::adaptive && !agent.ladder().at_max()) {
        if (adaptive.decide(ev.mean_return)) {
          const int old_bins = agent.ladder().active_bins();
          agent.grow();
          log_growth(completed, old_bins, "adaptive");
        }
      }
      if (++evals_since_checkpoint >= cfg.checkpoint_every || completed == cfg.episodes) {
        write_checkpoint(completed);
        evals_since_checkpoint = 0;
      }
    }
    if (options.stop_after_episodes && completed >= *options.stop_after_episodes) break;
  }
  return record;
}

// ---- sweep ----

struct CellResult {
  std::string config_name;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunRecord record;
};

struct CurvePoint {
  std::int64_t env_steps = 0;
  std::int64_t episode = 0;
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
};

// Mean and sample standard deviation across seeds, aligned by evaluation index.
inline std::vector<CurvePoint> aggregate_curve(const std::vector<const RunRecord*>& runs) {
  std::vector<CurvePoint> curve;
  std::size_t longest = 0;
  for (const auto* r : runs) longest = std::max(longest, r->rows.size());
  for (std::size_t i = 0; i < longest; ++i) {
    CurvePoint p;
    std::vector<double> vals;
    for (const auto* r : runs) {
      if (i < r->rows.size()) {
        vals.push_back(r->rows[i].eval_mean_return);
        p.env_steps = r->rows[i].env_steps;
        p.episode = r->rows[i].episode;
      }
    }
    p.n = static_cast<int>(vals.size());
    for (double v : vals) p.mean += v;
    p.mean /= p.n;
    if (p.n > 1) {
      double ss = 0.0;
      for (double v : vals) ss += (v - p.mean) * (v - p.mean);
      p.std = std::sqrt(ss / (p.n - 1));
    }
    curve.push_back(p);
  }
  return curve;
}

inline std::vector<CellResult> run_cells(const std::vector<RunConfig>& configs, int workers,
                                         const std::optional<fs::path>& out_dir) {
  if (configs.empty()) throw ConfigError("sweep: need at least one config");
  std::vector<CellResult> cells;
  for (const auto& c : configs) {
    for (auto s : c.seeds) cells.push_back({c.name, s, false, {}, {}});
  }
  std::map<std::string, const RunConfig*> by_name;
  for (const auto& c : configs) {
    if (!by_name.emplace(c.name, &c).second) throw ConfigError("sweep: duplicate config name '" + c.name + "'");
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      CellResult& cell = cells[i];
      const RunConfig& cfg = *by_name.at(cell.config_name);
      std::optional<fs::path> dir;
      if (out_dir) dir = *out_dir / cfg.name / fmt::format("seed_{}", cell.seed);
      try {
        cell.record = train(cfg, cell.seed, dir);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
        spdlog::error("sweep cell {} seed {} failed: {}", cell.config_name, cell.seed, e.what());
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return cells;
}

inline nlohmann::json aggregate_report(const std::vector<RunConfig>& configs, const std::vector<CellResult>& cells) {
  nlohmann::json report = {{"configs", nlohmann::json::array()}};
  for (const auto& cfg : configs) {
    nlohmann::json entry = {{"name", cfg.name}, {"env", cfg.env}, {"cells", nlohmann::json::array()}};
    std::vector<const RunRecord*> ok;
    for (const auto& c : cells) {
      if (c.config_name != cfg.name) continue;
      nlohmann::json cj = {{"seed", c.seed}, {"status", c.ok ? "ok" : "failed"}};
      if (!c.ok) cj["error"] = c.error;
      if (c.ok && !c.record.rows.empty()) cj["final_return"] = c.record.rows.back().eval_mean_return;
      entry["cells"].push_back(std::move(cj));
      if (c.ok) ok.push_back(&c.record);
    }
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : aggregate_curve(ok)) {
      curve.push_back({{"env_steps", p.env_steps}, {"episode", p.episode}, {"mean", p.mean}, {"std", p.std}, {"n", p.n}});
    }
    if (!curve.empty()) entry["final"] = {{"mean", curve.back()["mean"]}, {"std", curve.back()["std"]}};
    entry["curve"] = std::move(curve);
    report["configs"].push_back(std::move(entry));
  }
  return report;
}

inline nlohmann::json sweep(const std::vector<RunConfig>& configs, int workers, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto cells = run_cells(configs, workers, out_dir);
  nlohmann::json report = aggregate_report(configs, cells);
  write_text(out_dir / "aggregate.json", report.dump(2) + "\n");
  return report;
}

inline std::vector<RunConfig> load_sweep_configs(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  std::vector<RunConfig> configs;
  if (j.is_array()) {
    for (const auto& c : j) configs.push_back(parse_run_config(c));
  } else {
    configs.push_back(parse_run_config(j));
  }
  return configs;
}

// ---- radar ----

inline std::vector<fs::path> find_checkpoints(const fs::path& dir) {
  std::vector<fs::path> found;
  if (fs::is_regular_file(dir)) return {dir};
  if (!fs::is_directory(dir)) return found;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "checkpoint.bin") found.push_back(e.path());
  }
  std::sort(found.begin(), found.end());
  return found;
}

// Evaluates a checkpoint with the action penalty fixed at `penalty_reference`
// so the incurred-penalty metric P is comparable across agents trained with
// different c_a (including c_a = 0).
inline EpisodeMetrics checkpoint_metrics(const Checkpoint& c, double penalty_reference) {
  const GqnAgent agent = agent_from_checkpoint(c);
  return evaluate(agent, c.config.env, penalty_reference, c.config.eval_episodes, c.seed).metrics;
}

inline nlohmann::json radar_report(const fs::path& runs_dir, const fs::path& baseline_dir, double penalty_reference = 1.0) {
  const auto baseline_ckpts = find_checkpoints(baseline_dir);
  if (baseline_ckpts.empty()) throw ConfigError("radar: no baseline checkpoint under " + baseline_dir.string());
  std::vector<EpisodeMetrics> base;
  std::string env_id;
  std::string baseline_name;
  for (const auto& p : baseline_ckpts) {
    const Checkpoint c = load_checkpoint(p);
    if (env_id.empty()) {
      env_id = c.config.env;
      baseline_name = c.config.name;
    }
    if (c.config.env != env_id) throw ConfigError("radar: baseline checkpoints span several environments");
    base.push_back(checkpoint_metrics(c, penalty_reference));
  }
  const EpisodeMetrics baseline = mean_metrics(base);

  std::map<std::string, std::vector<EpisodeMetrics>> groups;
  for (const auto& p : find_checkpoints(runs_dir)) {
    const Checkpoint c = load_checkpoint(p);
    if (c.config.env != env_id) throw ConfigError("radar: " + p.string() + " was trained on a different environment");
    groups[c.config.name].push_back(checkpoint_metrics(c, penalty_reference));
  }
  if (groups.empty()) throw ConfigError("radar: no checkpoints under " + runs_dir.string());

  nlohmann::json agents = nlohmann::json::object();
  nlohmann::json raw = nlohmann::json::object();
  for (const auto& [name, ms] : groups) {
    const EpisodeMetrics m = mean_metrics(ms);
    agents[name] = radar_to_json(normalize_radar(m, baseline));
    raw[name] = {{"R", m.R}, {"P", m.P}, {"abs_a", m.abs_a}, {"abs_da", m.abs_da}, {"SM", m.SM}, {"seeds", ms.size()}};
  }
  raw["baseline"] = {{"R", baseline.R}, {"P", baseline.P}, {"abs_a", baseline.abs_a}, {"abs_da", baseline.abs_da},
                     {"SM", baseline.SM}, {"seeds", base.size()}};
  return {{"env", env_id}, {"baseline", baseline_name}, {"penalty_reference", penalty_reference},
          {"agents", std::move(agents)}, {"raw", std::move(raw)}};
}

}  // namespace gqn
