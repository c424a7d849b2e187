#pragma once

// When to grow the active action space: a linear episode schedule, or an
// adaptive stagnation test against a moving window of evaluation returns.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>

#include "gqn/error.hpp"

namespace gqn {

enum class GrowthMode { none, linear, adaptive };

inline std::string to_string(GrowthMode m) {
  switch (m) {
    case GrowthMode::none: return "none";
    case GrowthMode::linear: return "linear";
    case GrowthMode::adaptive: return "adaptive";
  }
  return "none";
}

inline GrowthMode growth_mode_from_string(const std::string& s) {
  if (s == "none") return GrowthMode::none;
  if (s == "linear") return GrowthMode::linear;
  if (s == "adaptive") return GrowthMode::adaptive;
  throw ConfigError("unknown growth mode '" + s + "' (expected none, linear or adaptive)");
}

// Level for `episode` when T episodes are split into N+1 equal phases and the
// final level holds for the last two.
inline int linear_level(std::int64_t episode, std::int64_t total_episodes, int num_levels) {
  if (num_levels < 1) throw ConfigError("linear_level: need at least one level");
  if (total_episodes < 1) throw ConfigError("linear_level: total episodes must be >= 1");
  if (episode < 0) return 0;
  const std::int64_t level = episode * (num_levels + 1) / total_episodes;
  return static_cast<int>(std::min<std::int64_t>(level, num_levels - 1));
}

class EvalWindow {
 public:
  explicit EvalWindow(std::size_t width = 10) : width_(width) {
    if (width == 0) throw ConfigError("evaluation window must hold at least one value");
  }

  void push(double mean_return) {
    values_.push_back(mean_return);
    if (values_.size() > width_) values_.pop_front();
  }
  void clear() { values_.clear(); }
  bool full() const { return values_.size() == width_; }
  std::size_t width() const { return width_; }
  const std::deque<double>& values() const { return values_; }

  double mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
  }

  // Population standard deviation.
  double stddev() const {
    const double mu = mean();
    double ss = 0.0;
    for (double v : values_) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(values_.size()));
  }

 private:
  std::size_t width_;
  std::deque<double> values_;
};

// (1 - 0.05 sgn mu) mu + 0.9 sigma
inline double growth_threshold(double mean, double stddev) {
  const double sgn = static_cast<double>((mean > 0.0) - (mean < 0.0));
  return (1.00 - 0.05 * sgn) * mean + 0.90 * stddev;
}

inline std::optional<double> threshold(const EvalWindow& window) {
  if (!window.full()) return std::nullopt;
  return growth_threshold(window.mean(), window.stddev());
}

class AdaptiveGrowth {
 public:
  AdaptiveGrowth(std::size_t window, int cooldown) : window_(window), cooldown_(cooldown) {
    if (cooldown < 0) throw ConfigError("cooldown must be >= 0");
  }

  const EvalWindow& window() const { return window_; }
  int evals_since_growth() const { return evals_since_growth_; }
  int cooldown() const { return cooldown_; }

  // Tests the current evaluation mean against the threshold built from the
  // previous evaluations, then folds it into the window. A growth clears the
  // window so the new resolution starts with fresh statistics.
  bool decide(double current_mean) {
    ++evals_since_growth_;
    const auto thr = threshold(window_);
    const bool grow = thr.has_value() && evals_since_growth_ >= cooldown_ && current_mean < *thr;
    if (grow) {
      window_.clear();
      evals_since_growth_ = 0;
    } else {
      window_.push(current_mean);
    }
    return grow;
  }

  nlohmann::json to_json() const {
    return {{"values", std::vector<double>(window_.values().begin(), window_.values().end())},
            {"evals_since_growth", evals_since_growth_}};
  }

  void load(const nlohmann::json& j) {
    window_.clear();
    for (double v : j.at("values").get<std::vector<double>>()) window_.push(v);
    evals_since_growth_ = j.at("evals_since_growth").get<int>();
  }

 private:
  EvalWindow window_;
  int cooldown_;
  int evals_since_growth_ = 0;
};

// Stateless form used by tests and tooling.
inline bool adaptive_decide(const EvalWindow& window, double current_mean, int evals_since_growth, int cooldown) {
  const auto thr = threshold(window);
  return thr.has_value() && evals_since_growth >= cooldown && current_mean < *thr;
}

}  // namespace gqn
