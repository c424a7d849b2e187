#pragma once

// Nested per-dimension discretization. Each level refines the previous one by
// inserting a midpoint into every interval (n -> 2n - 1 bins), so every
// coarse bin value is also a bin value of every finer level. The network
// always scores the finest grid; coarser levels are expressed as masks.

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

#include "gqn/error.hpp"

namespace gqn {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

struct ActionMask {
  int action_dim = 0;
  int full_bins = 0;
  std::vector<char> active;  // action_dim x full_bins, row-major

  bool operator()(int dim, int bin) const { return active[static_cast<std::size_t>(dim * full_bins + bin)] != 0; }

  int active_count(int dim) const {
    int n = 0;
    for (int i = 0; i < full_bins; ++i) n += (*this)(dim, i) ? 1 : 0;
    return n;
  }
};

class ResolutionLadder {
 public:
  ResolutionLadder() = default;

  static ResolutionLadder build(int min_bins, int max_bins, int action_dim, std::vector<Interval> bounds = {}) {
    if (min_bins < 2) throw ConfigError("ladder: min_bins must be >= 2");
    if (action_dim < 1) throw ConfigError("ladder: action_dim must be >= 1");
    if (max_bins < min_bins) throw ConfigError("ladder: max_bins must be >= min_bins");
    std::vector<int> levels{min_bins};
    while (levels.back() < max_bins) levels.push_back(2 * levels.back() - 1);
    if (levels.back() != max_bins) {
      const int below = levels.size() > 1 ? levels[levels.size() - 2] : min_bins;
      throw ConfigError("ladder: max_bins " + std::to_string(max_bins) + " is not reachable from " +
                        std::to_string(min_bins) + " by n -> 2n-1; nearest reachable values are " +
                        std::to_string(below) + " and " + std::to_string(levels.back()));
    }
    if (bounds.empty()) bounds.assign(static_cast<std::size_t>(action_dim), Interval{});
    if (static_cast<int>(bounds.size()) != action_dim) throw ConfigError("ladder: bounds size != action_dim");
    for (const auto& b : bounds) {
      if (!(b.lo < b.hi)) throw ConfigError("ladder: each bound needs lo < hi");
    }
    ResolutionLadder ladder;
    ladder.action_dim_ = action_dim;
    ladder.level_bins_ = std::move(levels);
    ladder.bounds_ = std::move(bounds);
    return ladder;
  }

  int action_dim() const { return action_dim_; }
  int full_bins() const { return level_bins_.back(); }
  int active_level() const { return active_level_; }
  int num_levels() const { return static_cast<int>(level_bins_.size()); }
  int active_bins() const { return level_bins_[static_cast<std::size_t>(active_level_)]; }
  bool at_max() const { return active_level_ + 1 == num_levels(); }
  const std::vector<int>& level_bins() const { return level_bins_; }
  const std::vector<Interval>& bounds() const { return bounds_; }

  double bin_value(int dim, int full_bin_index) const {
    if (dim < 0 || dim >= action_dim_) throw ContractViolation("bin_value: dimension out of range");
    if (full_bin_index < 0 || full_bin_index >= full_bins()) throw ContractViolation("bin_value: index out of range");
    const Interval& b = bounds_[static_cast<std::size_t>(dim)];
    if (full_bin_index == full_bins() - 1) return b.hi;
    return b.lo + full_bin_index * (b.hi - b.lo) / (full_bins() - 1);
  }

  // Full-grid indices selectable at `level` (identical for every dimension).
  std::vector<int> active_indices(int level) const {
    const int n = level_bins_.at(static_cast<std::size_t>(level));
    const int stride = (full_bins() - 1) / (n - 1);
    std::vector<int> idx;
    idx.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx.push_back(i * stride);
    return idx;
  }
  std::vector<int> active_indices() const { return active_indices(active_level_); }

  bool is_active(int full_bin_index) const {
    if (full_bin_index < 0 || full_bin_index >= full_bins()) return false;
    return full_bin_index % ((full_bins() - 1) / (active_bins() - 1)) == 0;
  }

  ActionMask active_mask() const {
    ActionMask m;
    m.action_dim = action_dim_;
    m.full_bins = full_bins();
    m.active.assign(static_cast<std::size_t>(action_dim_ * full_bins()), 0);
    for (int j = 0; j < action_dim_; ++j) {
      for (int i : active_indices()) m.active[static_cast<std::size_t>(j * full_bins() + i)] = 1;
    }
    return m;
  }

  // Returns true if the active level advanced; idempotent at the finest level.
  bool grow() {
    if (at_max()) return false;
    ++active_level_;
    return true;
  }

  void set_active_level(int level) {
    if (level < active_level_ || level >= num_levels()) throw ContractViolation("ladder: level may only increase");
    active_level_ = level;
  }

  std::vector<double> decode(std::span<const int> bin_indices) const {
    if (static_cast<int>(bin_indices.size()) != action_dim_) throw ContractViolation("decode: wrong action length");
    std::vector<double> action(bin_indices.size());
    for (std::size_t j = 0; j < bin_indices.size(); ++j) {
      const int idx = bin_indices[j];
      if (!is_active(idx)) {
        throw ContractViolation("decode: bin " + std::to_string(idx) + " of dimension " + std::to_string(j) +
                                " is masked at " + std::to_string(active_bins()) + "-bin resolution");
      }
      action[j] = bin_value(static_cast<int>(j), idx);
    }
    return action;
  }

  friend void to_json(nlohmann::json& j, const ResolutionLadder& l) {
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& b : l.bounds_) bounds.push_back({b.lo, b.hi});
    j = {{"min_bins", l.level_bins_.front()},
         {"max_bins", l.level_bins_.back()},
         {"action_dim", l.action_dim_},
         {"active_level", l.active_level_},
         {"bounds", std::move(bounds)}};
  }

  friend void from_json(const nlohmann::json& j, ResolutionLadder& l) {
    std::vector<Interval> bounds;
    for (const auto& b : j.at("bounds")) bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    l = ResolutionLadder::build(j.at("min_bins").get<int>(), j.at("max_bins").get<int>(), j.at("action_dim").get<int>(),
                                std::move(bounds));
    l.set_active_level(j.at("active_level").get<int>());
  }

 private:
  int action_dim_ = 0;
  std::vector<int> level_bins_;
  std::vector<Interval> bounds_;
  int active_level_ = 0;
};

}  // namespace gqn
