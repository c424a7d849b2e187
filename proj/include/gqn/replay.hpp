#pragma once

// n-step transition accumulation and proportional prioritized replay.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "gqn/error.hpp"
#include "gqn/nn.hpp"

namespace gqn {

struct Transition {
  Vector state;
  std::vector<int> action_bins;  // full-grid indices
  double n_step_reward = 0.0;
  Vector bootstrap_state;
  double bootstrap_discount = 0.0;  // gamma^n, or 0 when the episode ended inside the window
};

struct EnvStep {
  Vector state;
  std::vector<int> action_bins;
  double reward = 0.0;
  Vector next_state;
  bool terminal = false;
};

class NStepAccumulator {
 public:
  NStepAccumulator(int n, double gamma) : n_(n), gamma_(gamma) {
    if (n < 1) throw ConfigError("n-step horizon must be >= 1");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
  }

  int horizon() const { return n_; }
  double gamma() const { return gamma_; }
  std::size_t pending() const { return pending_.size(); }

  std::vector<Transition> accumulate(EnvStep step) {
    std::vector<Transition> out;
    const bool terminal = step.terminal;
    pending_.push_back(std::move(step));
    if (terminal) {
      while (!pending_.empty()) {
        out.push_back(make(pending_.size(), 0.0));
        pending_.pop_front();
      }
    } else if (static_cast<int>(pending_.size()) == n_) {
      out.push_back(make(pending_.size(), std::pow(gamma_, n_)));
      pending_.pop_front();
    }
    return out;
  }

  void clear() { pending_.clear(); }

 private:
  Transition make(std::size_t horizon, double discount) const {
    Transition t;
    t.state = pending_.front().state;
    t.action_bins = pending_.front().action_bins;
    double g = 1.0;
    for (std::size_t k = 0; k < horizon; ++k) {
      t.n_step_reward += g * pending_[k].reward;
      g *= gamma_;
    }
    t.bootstrap_state = pending_[horizon - 1].next_state;
    t.bootstrap_discount = discount;
    return t;
  }

  int n_;
  double gamma_;
  std::deque<EnvStep> pending_;
};

// Complete binary tree over `capacity` leaves (a power of two); node i holds
// the sum of its children, node 1 is the root.
class SumTree {
 public:
  explicit SumTree(std::size_t min_capacity = 1) {
    capacity_ = 1;
    while (capacity_ < min_capacity) capacity_ <<= 1;
    nodes_.assign(2 * capacity_, 0.0);
  }

  std::size_t capacity() const { return capacity_; }
  double total() const { return nodes_[1]; }
  double get(std::size_t leaf) const { return nodes_[capacity_ + leaf]; }
  const std::vector<double>& nodes() const { return nodes_; }

  void set(std::size_t leaf, double priority) {
    if (leaf >= capacity_) throw ContractViolation("SumTree::set: leaf out of range");
    if (!(priority >= 0.0) || !std::isfinite(priority)) throw ContractViolation("SumTree::set: bad priority");
    std::size_t i = capacity_ + leaf;
    nodes_[i] = priority;
    for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
  }

  // Leaf whose cumulative interval contains `prefix`. Never lands on a zero leaf
  // as long as the total is positive.
  std::size_t find(double prefix) const {
    std::size_t i = 1;
    while (i < capacity_) {
      const double left = nodes_[2 * i];
      if (prefix < left || nodes_[2 * i + 1] <= 0.0) {
        i = 2 * i;
      } else {
        prefix -= left;
        i = 2 * i + 1;
      }
    }
    return i - capacity_;
  }

 private:
  std::size_t capacity_;
  std::vector<double> nodes_;
};

struct ReplayConfig {
  std::size_t capacity = 100000;
  double alpha = 0.6;
  double priority_eps = 1e-3;
};

struct SampleHandle {
  std::size_t slot = 0;
  std::uint64_t generation = 0;
};

struct ReplaySample {
  std::vector<const Transition*> transitions;
  std::vector<SampleHandle> handles;
  Vector importance_weights;
};

class PrioritizedReplay {
 public:
  explicit PrioritizedReplay(ReplayConfig config = {}) : config_(config), tree_(config.capacity) {
    if (config.capacity < 1) throw ConfigError("replay capacity must be >= 1");
    if (!(config.alpha >= 0.0)) throw ConfigError("PER alpha must be >= 0");
    if (!(config.priority_eps > 0.0)) throw ConfigError("PER epsilon must be > 0");
    slots_.resize(config.capacity);
    generation_.assign(config.capacity, 0);
  }

  const ReplayConfig& config() const { return config_; }
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return config_.capacity; }
  double max_priority() const { return max_priority_; }
  double total_priority() const { return tree_.total(); }
  double priority(std::size_t slot) const { return tree_.get(slot); }
  std::uint64_t stale_updates() const { return stale_updates_; }
  const SumTree& tree() const { return tree_; }
  const Transition& at(std::size_t slot) const { return slots_.at(slot); }

  void push(Transition t) {
    const std::size_t slot = cursor_;
    slots_[slot] = std::move(t);
    generation_[slot] = ++push_count_;
    tree_.set(slot, max_priority_);
    cursor_ = (cursor_ + 1) % config_.capacity;
    if (size_ < config_.capacity) ++size_;
  }

  // Stratified proportional sampling: B equal slices of the priority mass, one
  // uniform draw per slice. Weights (N * P(i))^-beta normalised by the batch max.
  template <class Rng>
  ReplaySample sample(std::size_t batch, double beta, Rng& rng) const {
    if (batch == 0) throw ConfigError("sample: batch must be >= 1");
    if (size_ < batch) throw ContractViolation("sample: buffer holds fewer transitions than the batch size");
    ReplaySample out;
    out.transitions.reserve(batch);
    out.handles.reserve(batch);
    out.importance_weights.resize(static_cast<Eigen::Index>(batch));
    const double total = tree_.total();
    const double segment = total / static_cast<double>(batch);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double max_w = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      double prefix = segment * (static_cast<double>(b) + unit(rng));
      if (prefix >= total) prefix = std::nextafter(total, 0.0);
      const std::size_t slot = tree_.find(prefix);
      const double p = tree_.get(slot) / total;
      const double w = std::pow(static_cast<double>(size_) * p, -beta);
      out.importance_weights[static_cast<Eigen::Index>(b)] = w;
      max_w = std::max(max_w, w);
      out.transitions.push_back(&slots_[slot]);
      out.handles.push_back({slot, generation_[slot]});
    }
    out.importance_weights /= max_w;
    return out;
  }

  void update_priorities(const std::vector<SampleHandle>& handles, const Vector& td_errors) {
    if (static_cast<Eigen::Index>(handles.size()) != td_errors.size()) {
      throw ContractViolation("update_priorities: handle/error length mismatch");
    }
    for (std::size_t i = 0; i < handles.size(); ++i) {
      const auto& h = handles[i];
      if (h.slot >= config_.capacity || generation_[h.slot] != h.generation) {
        ++stale_updates_;
        continue;
      }
      const double p = std::pow(std::abs(td_errors[static_cast<Eigen::Index>(i)]) + config_.priority_eps, config_.alpha);
      tree_.set(h.slot, p);
      max_priority_ = std::max(max_priority_, p);
    }
  }

  // Direct priority write (already alpha-scaled); used by tests and tooling.
  void set_priority(std::size_t slot, double priority) {
    if (slot >= size_) throw ContractViolation("set_priority: empty slot");
    tree_.set(slot, priority);
    max_priority_ = std::max(max_priority_, priority);
  }

  nlohmann::json to_json() const;
  static PrioritizedReplay from_json(const nlohmann::json& j);

 private:
  ReplayConfig config_;
  SumTree tree_;
  std::vector<Transition> slots_;
  std::vector<std::uint64_t> generation_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::uint64_t push_count_ = 0;
  std::uint64_t stale_updates_ = 0;
  double max_priority_ = 1.0;
};

inline nlohmann::json PrioritizedReplay::to_json() const {
  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t i = 0; i < size_; ++i) {
    const Transition& t = slots_[i];
    slots.push_back({{"s", vector_to_json(t.state)},
                     {"a", t.action_bins},
                     {"r", t.n_step_reward},
                     {"s2", vector_to_json(t.bootstrap_state)},
                     {"d", t.bootstrap_discount},
                     {"gen", generation_[i]},
                     {"p", tree_.get(i)}});
  }
  return {{"capacity", config_.capacity},
          {"alpha", config_.alpha},
          {"priority_eps", config_.priority_eps},
          {"cursor", cursor_},
          {"size", size_},
          {"push_count", push_count_},
          {"stale_updates", stale_updates_},
          {"max_priority", max_priority_},
          {"slots", std::move(slots)}};
}

inline PrioritizedReplay PrioritizedReplay::from_json(const nlohmann::json& j) {
  ReplayConfig cfg;
  cfg.capacity = j.at("capacity").get<std::size_t>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.priority_eps = j.at("priority_eps").get<double>();
  PrioritizedReplay r(cfg);
  r.cursor_ = j.at("cursor").get<std::size_t>();
  r.size_ = j.at("size").get<std::size_t>();
  r.push_count_ = j.at("push_count").get<std::uint64_t>();
  r.stale_updates_ = j.at("stale_updates").get<std::uint64_t>();
  r.max_priority_ = j.at("max_priority").get<double>();
  const auto& slots = j.at("slots");
  if (slots.size() != r.size_ || r.size_ > cfg.capacity) throw ConfigError("replay: slot count mismatch");
  for (std::size_t i = 0; i < r.size_; ++i) {
    const auto& s = slots[i];
    Transition& t = r.slots_[i];
    t.state = vector_from_json(s.at("s"));
    t.action_bins = s.at("a").get<std::vector<int>>();
    t.n_step_reward = s.at("r").get<double>();
    t.bootstrap_state = vector_from_json(s.at("s2"));
    t.bootstrap_discount = s.at("d").get<double>();
    r.generation_[i] = s.at("gen").get<std::uint64_t>();
    r.tree_.set(i, s.at("p").get<double>());
  }
  return r;
}

}  // namespace gqn
