#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "gqn/agent.hpp"
#include "gqn/error.hpp"
#include "gqn/scheduler.hpp"

namespace gqn {

struct RunConfig {
  std::string name = "gqn";
  std::string env = "pendulum_swingup";
  double penalty = 0.0;  // c_a
  int min_bins = 2;
  int max_bins = 9;
  GrowthMode growth = GrowthMode::adaptive;
  std::size_t growth_window = 10;
  int growth_cooldown = 5;
  std::int64_t episodes = 300;
  std::int64_t eval_every = 25;
  int eval_episodes = 10;
  int checkpoint_every = 1;  // in evaluations; the final checkpoint is always written
  Hyperparams hyper;
  double eps_decay_fraction = 0.1;
  double per_beta_fraction = 1.0;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3};
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const nlohmann::json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::read;
  detail::reject_unknown(j, {"name", "env", "penalty", "ladder", "growth", "episodes", "eval", "checkpoint_every", "agent", "seeds"},
                         "run config");
  RunConfig c;
  read(j, "name", c.name);
  read(j, "env", c.env);
  read(j, "penalty", c.penalty);
  read(j, "episodes", c.episodes);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "seeds", c.seeds);
  if (auto it = j.find("ladder"); it != j.end()) {
    detail::reject_unknown(*it, {"min_bins", "max_bins"}, "ladder");
    read(*it, "min_bins", c.min_bins);
    read(*it, "max_bins", c.max_bins);
  }
  if (auto it = j.find("growth"); it != j.end()) {
    detail::reject_unknown(*it, {"mode", "window", "cooldown"}, "growth");
    std::string mode = to_string(c.growth);
    read(*it, "mode", mode);
    c.growth = growth_mode_from_string(mode);
    read(*it, "window", c.growth_window);
    read(*it, "cooldown", c.growth_cooldown);
  }
  if (auto it = j.find("eval"); it != j.end()) {
    detail::reject_unknown(*it, {"every", "episodes"}, "eval");
    read(*it, "every", c.eval_every);
    read(*it, "episodes", c.eval_episodes);
  }
  if (auto it = j.find("agent"); it != j.end()) {
    const auto& a = *it;
    detail::reject_unknown(a,
                           {"profile", "gamma", "n_step", "batch_size", "learning_rate", "target_period", "eps_start",
                            "eps_end", "eps_decay_fraction", "per_alpha", "per_beta_start", "per_beta_end",
                            "per_beta_fraction", "per_eps", "huber_delta", "hidden", "train_every", "replay_capacity",
                            "min_fill", "pure_target_max"},
                           "agent");
    std::string profile = "default";
    read(a, "profile", profile);
    if (profile == "high_capacity") {
      c.hyper.hidden = {2048, 2048};
      c.hyper.gamma = 0.95;
    } else if (profile != "default") {
      throw ConfigError("unknown agent profile '" + profile + "' (expected default or high_capacity)");
    }
    Hyperparams& h = c.hyper;
    read(a, "gamma", h.gamma);
    read(a, "n_step", h.n_step);
    read(a, "batch_size", h.batch_size);
    read(a, "learning_rate", h.learning_rate);
    read(a, "target_period", h.target_period);
    read(a, "eps_start", h.eps_start);
    read(a, "eps_end", h.eps_end);
    read(a, "eps_decay_fraction", c.eps_decay_fraction);
    read(a, "per_alpha", h.per_alpha);
    read(a, "per_beta_start", h.per_beta_start);
    read(a, "per_beta_end", h.per_beta_end);
    read(a, "per_beta_fraction", c.per_beta_fraction);
    read(a, "per_eps", h.per_eps);
    read(a, "huber_delta", h.huber_delta);
    read(a, "hidden", h.hidden);
    read(a, "train_every", h.train_every);
    read(a, "replay_capacity", h.replay_capacity);
    read(a, "min_fill", h.min_fill);
    read(a, "pure_target_max", h.pure_target_max);
  }

  if (c.name.empty()) throw ConfigError("name must not be empty");
  if (!(c.penalty >= 0.0)) throw ConfigError("penalty must be >= 0");
  if (c.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (c.eval_every < 1) throw ConfigError("eval.every must be >= 1");
  if (c.eval_episodes < 1) throw ConfigError("eval.episodes must be >= 1");
  if (c.checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
  if (c.growth_window < 1) throw ConfigError("growth.window must be >= 1");
  if (c.growth_cooldown < 0) throw ConfigError("growth.cooldown must be >= 0");
  if (!(c.eps_decay_fraction >= 0.0 && c.eps_decay_fraction <= 1.0)) throw ConfigError("eps_decay_fraction must be in [0, 1]");
  if (!(c.per_beta_fraction >= 0.0 && c.per_beta_fraction <= 1.0)) throw ConfigError("per_beta_fraction must be in [0, 1]");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  c.hyper.validate();
  return c;
}

inline nlohmann::json run_config_to_json(const RunConfig& c) {
  const Hyperparams& h = c.hyper;
  return {{"name", c.name},
          {"env", c.env},
          {"penalty", c.penalty},
          {"ladder", {{"min_bins", c.min_bins}, {"max_bins", c.max_bins}}},
          {"growth", {{"mode", to_string(c.growth)}, {"window", c.growth_window}, {"cooldown", c.growth_cooldown}}},
          {"episodes", c.episodes},
          {"eval", {{"every", c.eval_every}, {"episodes", c.eval_episodes}}},
          {"checkpoint_every", c.checkpoint_every},
          {"agent",
           {{"gamma", h.gamma},
            {"n_step", h.n_step},
            {"batch_size", h.batch_size},
            {"learning_rate", h.learning_rate},
            {"target_period", h.target_period},
            {"eps_start", h.eps_start},
            {"eps_end", h.eps_end},
            {"eps_decay_fraction", c.eps_decay_fraction},
            {"per_alpha", h.per_alpha},
            {"per_beta_start", h.per_beta_start},
            {"per_beta_end", h.per_beta_end},
            {"per_beta_fraction", c.per_beta_fraction},
            {"per_eps", h.per_eps},
            {"huber_delta", h.huber_delta},
            {"hidden", h.hidden},
            {"train_every", h.train_every},
            {"replay_capacity", h.replay_capacity},
            {"min_fill", h.min_fill},
            {"pure_target_max", h.pure_target_max}}},
          {"seeds", c.seeds}};
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_json_file(path)); }

}  // namespace gqn
