#pragma once

// Growing Q-Network agent: one shared torso emitting a utility per
// (action dimension, full-grid bin). The joint value is the mean of the
// selected per-dimension utilities; acting and bootstrapping only consider
// bins active at the current ladder level.

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "gqn/action_space.hpp"
#include "gqn/error.hpp"
#include "gqn/nn.hpp"
#include "gqn/replay.hpp"

namespace gqn {

struct Hyperparams {
  double gamma = 0.99;
  int n_step = 3;
  int batch_size = 128;
  double learning_rate = 1e-4;
  int target_period = 100;
  double eps_start = 1.0;
  double eps_end = 0.05;
  std::int64_t eps_decay_steps = 10000;
  double per_alpha = 0.6;
  double per_beta_start = 0.4;
  double per_beta_end = 1.0;
  std::int64_t per_beta_steps = 100000;
  double per_eps = 1e-3;
  double huber_delta = 1.0;
  std::vector<int> hidden{512, 512};
  int train_every = 1;
  std::size_t replay_capacity = 100000;
  std::size_t min_fill = 1000;
  bool pure_target_max = false;

  void validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
    if (n_step < 1) throw ConfigError("n_step must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
    if (target_period < 1) throw ConfigError("target_period must be >= 1");
    if (!(eps_start >= 0.0 && eps_start <= 1.0 && eps_end >= 0.0 && eps_end <= 1.0))
      throw ConfigError("epsilon schedule must stay in [0, 1]");
    if (eps_decay_steps < 0 || per_beta_steps < 0) throw ConfigError("schedule lengths must be >= 0");
    if (!(huber_delta > 0.0)) throw ConfigError("huber_delta must be > 0");
    if (train_every < 1) throw ConfigError("train_every must be >= 1");
    for (int h : hidden) {
      if (h < 1) throw ConfigError("hidden sizes must be positive");
    }
  }
};

// B x (M * N_full) head output viewed as B x M x N_full.
struct Utilities {
  Matrix values;
  int action_dim = 0;
  int full_bins = 0;

  double operator()(Eigen::Index b, int dim, int bin) const { return values(b, dim * full_bins + bin); }
  Eigen::Index batch() const { return values.rows(); }
};

inline Utilities utilities(const DenseNet& net, const Matrix& observations, int action_dim, int full_bins) {
  if (net.output_dim() != action_dim * full_bins) {
    throw ContractViolation("utilities: head width does not equal action_dim * full_bins");
  }
  return {predict(net, observations), action_dim, full_bins};
}

// Mean over dimensions of the selected utilities.
inline double q_value(const Utilities& u, Eigen::Index b, std::span<const int> bins) {
  if (static_cast<int>(bins.size()) != u.action_dim) throw ContractViolation("q_value: wrong number of bins");
  double sum = 0.0;
  for (int j = 0; j < u.action_dim; ++j) {
    const int i = bins[static_cast<std::size_t>(j)];
    if (i < 0 || i >= u.full_bins) throw ContractViolation("q_value: bin index out of range");
    sum += u(b, j, i);
  }
  return sum / u.action_dim;
}

// Lowest-index argmax over the active bins of one dimension.
inline int masked_argmax(const Utilities& u, Eigen::Index b, int dim, std::span<const int> active) {
  int best = active.front();
  double best_v = u(b, dim, best);
  for (int i : active.subspan(1)) {
    const double v = u(b, dim, i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

// Output-space gradient of a per-sample dQ: each selected utility receives
// dQ / M, every other entry of the head stays zero.
inline Matrix selected_utility_grad(const Vector& dq, const std::vector<std::vector<int>>& bins, int action_dim,
                                    int full_bins) {
  Matrix dout = Matrix::Zero(dq.size(), action_dim * full_bins);
  const double inv_m = 1.0 / action_dim;
  for (Eigen::Index b = 0; b < dq.size(); ++b) {
    const auto& row = bins[static_cast<std::size_t>(b)];
    for (int j = 0; j < action_dim; ++j) dout(b, j * full_bins + row[static_cast<std::size_t>(j)]) += dq[b] * inv_m;
  }
  return dout;
}

struct ComposedLoss {
  double loss = 0.0;
  Vector q;  // composed Q at the stored actions
  Matrix output_grad;
  Params grads;
};

// Weighted Huber loss of the mean-composed Q at `bins` against fixed targets,
// with its gradient w.r.t. every network parameter.
inline ComposedLoss composed_loss(const DenseNet& net, const Matrix& states, const std::vector<std::vector<int>>& bins,
                                  const Vector& targets, const Vector& weights, double huber_delta, int full_bins) {
  if (net.output_dim() % full_bins != 0) throw ContractViolation("composed_loss: head width not a multiple of bins");
  const int action_dim = net.output_dim() / full_bins;
  if (static_cast<Eigen::Index>(bins.size()) != states.rows()) throw ContractViolation("composed_loss: batch mismatch");
  auto [out, cache] = forward(net, states);
  const Utilities u{std::move(out), action_dim, full_bins};
  ComposedLoss c;
  c.q.resize(states.rows());
  for (Eigen::Index b = 0; b < states.rows(); ++b) c.q[b] = q_value(u, b, bins[static_cast<std::size_t>(b)]);
  const HuberResult h = huber_loss_and_grad(c.q, targets, huber_delta, weights);
  c.loss = h.loss;
  c.output_grad = selected_utility_grad(h.grad, bins, action_dim, full_bins);
  c.grads = backward(net, cache, c.output_grad);
  return c;
}

struct TrainDiagnostics {
  double loss = 0.0;
  double mean_td_error = 0.0;
  double mean_q = 0.0;
};

struct GrowthRecord {
  std::int64_t env_steps = 0;
  int old_bins = 0;
  int new_bins = 0;
};

class GqnAgent {
 public:
  GqnAgent(int obs_dim, ResolutionLadder ladder, Hyperparams hyper, std::uint64_t seed)
      : hyper_(std::move(hyper)),
        ladder_(std::move(ladder)),
        replay_(ReplayConfig{hyper_.replay_capacity, hyper_.per_alpha, hyper_.per_eps}),
        accumulator_(hyper_.n_step, hyper_.gamma),
        rng_(seed) {
    hyper_.validate();
    std::vector<int> dims{obs_dim};
    dims.insert(dims.end(), hyper_.hidden.begin(), hyper_.hidden.end());
    dims.push_back(ladder_.action_dim() * ladder_.full_bins());
    online_ = init_net(dims, seed ^ 0x9e3779b97f4a7c15ULL);
    target_ = online_;
    adam_ = make_adam(online_, AdamConfig{hyper_.learning_rate, 0.9, 0.999, 1e-8});
  }

  const Hyperparams& hyper() const { return hyper_; }
  const DenseNet& online() const { return online_; }
  const DenseNet& target() const { return target_; }
  DenseNet& mutable_online() { return online_; }
  DenseNet& mutable_target() { return target_; }
  const AdamState& adam() const { return adam_; }
  const ResolutionLadder& ladder() const { return ladder_; }
  const PrioritizedReplay& replay() const { return replay_; }
  PrioritizedReplay& mutable_replay() { return replay_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::int64_t grad_steps() const { return grad_steps_; }
  const std::vector<GrowthRecord>& growth_log() const { return growth_log_; }
  int action_dim() const { return ladder_.action_dim(); }
  int full_bins() const { return ladder_.full_bins(); }

  double epsilon() const {
    if (hyper_.eps_decay_steps == 0 || env_steps_ >= hyper_.eps_decay_steps) return hyper_.eps_end;
    const double frac = static_cast<double>(env_steps_) / static_cast<double>(hyper_.eps_decay_steps);
    return hyper_.eps_start + frac * (hyper_.eps_end - hyper_.eps_start);
  }

  double beta() const {
    if (hyper_.per_beta_steps == 0 || env_steps_ >= hyper_.per_beta_steps) return hyper_.per_beta_end;
    const double frac = static_cast<double>(env_steps_) / static_cast<double>(hyper_.per_beta_steps);
    return hyper_.per_beta_start + frac * (hyper_.per_beta_end - hyper_.per_beta_start);
  }

  Utilities utilities_of(const DenseNet& net, const Matrix& obs) const {
    return utilities(net, obs, action_dim(), full_bins());
  }

  std::vector<int> greedy_action(const Vector& obs) const {
    const Utilities u = utilities_of(online_, obs.transpose());
    const auto active = ladder_.active_indices();
    std::vector<int> bins(static_cast<std::size_t>(action_dim()));
    for (int j = 0; j < action_dim(); ++j) bins[static_cast<std::size_t>(j)] = masked_argmax(u, 0, j, active);
    return bins;
  }

  // Independent epsilon-greedy per dimension, restricted to active bins.
  std::vector<int> select_action(const Vector& obs, double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ContractViolation("select_action: epsilon outside [0, 1]");
    const auto active = ladder_.active_indices();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    std::vector<int> bins(static_cast<std::size_t>(action_dim()), -1);
    bool need_greedy = false;
    for (auto& b : bins) {
      if (unit(rng_) < eps) {
        b = active[pick(rng_)];
      } else {
        need_greedy = true;
      }
    }
    if (need_greedy) {
      const Utilities u = utilities_of(online_, obs.transpose());
      for (int j = 0; j < action_dim(); ++j) {
        auto& b = bins[static_cast<std::size_t>(j)];
        if (b < 0) b = masked_argmax(u, 0, j, active);
      }
    }
    return bins;
  }

  // y = R_n + discount * mean_j Q_target^j(s', a*_j), a*_j the masked argmax of
  // the online utilities (or of the target utilities with pure_target_max).
  Vector td_target(std::span<const Transition* const> batch) const {
    if (batch.empty()) throw ContractViolation("td_target: empty batch");
    const auto B = static_cast<Eigen::Index>(batch.size());
    Matrix next(B, online_.input_dim());
    for (Eigen::Index b = 0; b < B; ++b) next.row(b) = batch[static_cast<std::size_t>(b)]->bootstrap_state.transpose();
    const Utilities tgt = utilities_of(target_, next);
    const Utilities sel = hyper_.pure_target_max ? tgt : utilities_of(online_, next);
    const auto active = ladder_.active_indices();
    Vector y(B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const Transition& t = *batch[static_cast<std::size_t>(b)];
      double boot = 0.0;
      for (int j = 0; j < action_dim(); ++j) boot += tgt(b, j, masked_argmax(sel, b, j, active));
      y[b] = t.n_step_reward + t.bootstrap_discount * boot / action_dim();
    }
    return y;
  }

  bool ready_to_train() const {
    return replay_.size() >= std::max<std::size_t>(static_cast<std::size_t>(hyper_.batch_size), hyper_.min_fill);
  }

  TrainDiagnostics train_step() {
    if (!ready_to_train()) throw ContractViolation("train_step: replay not filled");
    const auto B = static_cast<std::size_t>(hyper_.batch_size);
    ReplaySample sample = replay_.sample(B, beta(), rng_);
    const Vector y = td_target(sample.transitions);

    Matrix states(static_cast<Eigen::Index>(B), online_.input_dim());
    std::vector<std::vector<int>> bins(B);
    for (std::size_t b = 0; b < B; ++b) {
      states.row(static_cast<Eigen::Index>(b)) = sample.transitions[b]->state.transpose();
      bins[b] = sample.transitions[b]->action_bins;
    }
    const ComposedLoss c =
        composed_loss(online_, states, bins, y, sample.importance_weights, hyper_.huber_delta, full_bins());
    if (!std::isfinite(c.loss)) throw DivergenceError("train_step: non-finite loss");
    adam_step(online_, c.grads, adam_);
    const Vector& q = c.q;

    const Vector td = y - q;
    replay_.update_priorities(sample.handles, td);
    ++grad_steps_;
    if (grad_steps_ % hyper_.target_period == 0) copy_params(online_, target_);

    return {c.loss, td.cwiseAbs().mean(), q.mean()};
  }

  // Records one environment step; trains when the cadence and fill allow.
  std::optional<TrainDiagnostics> observe(EnvStep step) {
    for (auto& t : accumulator_.accumulate(std::move(step))) replay_.push(std::move(t));
    ++env_steps_;
    if (ready_to_train() && env_steps_ % hyper_.train_every == 0) return train_step();
    return std::nullopt;
  }

  // Widens the mask only; heads for every full-grid bin exist from init.
  bool grow() {
    const int old_bins = ladder_.active_bins();
    if (!ladder_.grow()) return false;
    on_growth(old_bins);
    return true;
  }

  void sync_target() { copy_params(online_, target_); }

  nlohmann::json state_to_json() const {
    std::ostringstream rng_state;
    rng_state << rng_;
    nlohmann::json growth = nlohmann::json::array();
    for (const auto& g : growth_log_) growth.push_back({g.env_steps, g.old_bins, g.new_bins});
    return {{"online", net_to_json(online_)},   {"target", net_to_json(target_)}, {"adam", adam_to_json(adam_)},
            {"ladder", ladder_},                {"replay", replay_.to_json()},    {"env_steps", env_steps_},
            {"grad_steps", grad_steps_},        {"rng", rng_state.str()},         {"growth", std::move(growth)},
            {"pending", accumulator_.pending()}};
  }

  // Restores counters, parameters and buffers onto an agent built from the same config.
  void load_state(const nlohmann::json& j) {
    DenseNet online = net_from_json(j.at("online"));
    DenseNet target = net_from_json(j.at("target"));
    if (online.layer_dims != online_.layer_dims || target.layer_dims != online_.layer_dims) {
      throw ConfigError("checkpoint: network architecture does not match the configuration");
    }
    if (j.at("pending").get<std::size_t>() != 0) throw ConfigError("checkpoint: taken mid-episode");
    ResolutionLadder ladder = j.at("ladder").get<ResolutionLadder>();
    if (ladder.level_bins() != ladder_.level_bins() || ladder.action_dim() != ladder_.action_dim()) {
      throw ConfigError("checkpoint: ladder does not match the configuration");
    }
    online_ = std::move(online);
    target_ = std::move(target);
    adam_ = adam_from_json(j.at("adam"));
    ladder_ = std::move(ladder);
    replay_ = PrioritizedReplay::from_json(j.at("replay"));
    env_steps_ = j.at("env_steps").get<std::int64_t>();
    grad_steps_ = j.at("grad_steps").get<std::int64_t>();
    std::istringstream rng_state(j.at("rng").get<std::string>());
    rng_state >> rng_;
    growth_log_.clear();
    for (const auto& g : j.at("growth")) growth_log_.push_back({g.at(0).get<std::int64_t>(), g.at(1).get<int>(), g.at(2).get<int>()});
    accumulator_.clear();
  }

 private:
  void on_growth(int old_bins) {
    growth_log_.push_back({env_steps_, old_bins, ladder_.active_bins()});
    spdlog::debug("resolution grown {} -> {} bins at env step {}", old_bins, ladder_.active_bins(), env_steps_);
  }

  Hyperparams hyper_;
  ResolutionLadder ladder_;
  DenseNet online_;
  DenseNet target_;
  AdamState adam_;
  PrioritizedReplay replay_;
  NStepAccumulator accumulator_;
  std::mt19937_64 rng_;
  std::int64_t env_steps_ = 0;
  std::int64_t grad_steps_ = 0;
  std::vector<GrowthRecord> growth_log_;
};

}  // namespace gqn
