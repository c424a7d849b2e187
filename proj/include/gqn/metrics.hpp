#pragma once

// Return and control-smoothness statistics over recorded episodes.

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gqn/error.hpp"

namespace gqn {

struct EpisodeTrace {
  std::vector<std::vector<double>> actions;  // agent-side units, one vector per step
  std::vector<double> raw_rewards;           // r^o
  std::vector<double> rewards;               // penalized r
  double dt = 0.05;

  std::size_t length() const { return actions.size(); }
};

struct EpisodeMetrics {
  double R = 0.0;       // undiscounted task return
  double P = 0.0;       // incurred action penalty
  double abs_a = 0.0;   // mean |a|
  double abs_da = 0.0;  // mean |a_{t+1} - a_t|
  double SM = 0.0;      // spectral smoothness, lower is smoother
};

inline constexpr std::array<const char*, 5> kRadarKeys{"R", "P", "abs_a", "abs_da", "SM"};

inline double metric_value(const EpisodeMetrics& m, std::string_view key) {
  if (key == "R") return m.R;
  if (key == "P") return m.P;
  if (key == "abs_a") return m.abs_a;
  if (key == "abs_da") return m.abs_da;
  if (key == "SM") return m.SM;
  throw ConfigError("unknown metric key");
}

// One-sided amplitude spectrum without DC, A_k at f_k = k fs / n for
// k = 1..floor(n/2); SM = 2 / (n_f fs) * sum_k A_k f_k.
inline double fft_smoothness(std::span<const double> signal, double dt) {
  const std::size_t n = signal.size();
  if (n < 4) throw ConfigError("fft_smoothness: need at least 4 samples");
  if (!(dt > 0.0)) throw ConfigError("fft_smoothness: dt must be positive");
  // Centre on the first sample before averaging so a constant signal gives exact zeros.
  std::vector<double> centred(n);
  double mean = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    centred[t] = signal[t] - signal[0];
    mean += centred[t];
  }
  mean /= static_cast<double>(n);

  std::vector<std::complex<double>> twiddle(n);
  for (std::size_t m = 0; m < n; ++m) {
    twiddle[m] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n));
  }

  const double fs = 1.0 / dt;
  const std::size_t nf = n / 2;
  double weighted = 0.0;
  for (std::size_t k = 1; k <= nf; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) acc += (centred[t] - mean) * twiddle[(k * t) % n];
    const bool nyquist = (2 * k == n);
    const double amplitude = std::abs(acc) * (nyquist ? 1.0 : 2.0) / static_cast<double>(n);
    const double freq = static_cast<double>(k) * fs / static_cast<double>(n);
    weighted += amplitude * freq;
  }
  return 2.0 * weighted / (static_cast<double>(nf) * fs);
}

inline EpisodeMetrics episode_metrics(const EpisodeTrace& trace) {
  const std::size_t T = trace.length();
  if (T < 2) throw ConfigError("episode_metrics: trace needs at least 2 steps");
  if (trace.raw_rewards.size() != T || trace.rewards.size() != T) {
    throw ConfigError("episode_metrics: inconsistent trace lengths");
  }
  const std::size_t M = trace.actions.front().size();
  for (const auto& a : trace.actions) {
    if (a.size() != M) throw ConfigError("episode_metrics: ragged action vectors");
  }
  EpisodeMetrics m;
  for (std::size_t t = 0; t < T; ++t) {
    m.R += trace.raw_rewards[t];
    m.P += trace.raw_rewards[t] - trace.rewards[t];
    for (double a : trace.actions[t]) m.abs_a += std::abs(a);
    if (t + 1 < T) {
      for (std::size_t j = 0; j < M; ++j) m.abs_da += std::abs(trace.actions[t + 1][j] - trace.actions[t][j]);
    }
  }
  m.abs_a /= static_cast<double>(T * M);
  m.abs_da /= static_cast<double>((T - 1) * M);
  if (T >= 4) {
    std::vector<double> channel(T);
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t t = 0; t < T; ++t) channel[t] = trace.actions[t][j];
      m.SM += fft_smoothness(channel, trace.dt);
    }
    m.SM /= static_cast<double>(M);
  }
  return m;
}

inline EpisodeMetrics mean_metrics(std::span<const EpisodeMetrics> all) {
  EpisodeMetrics m;
  if (all.empty()) return m;
  for (const auto& x : all) {
    m.R += x.R;
    m.P += x.P;
    m.abs_a += x.abs_a;
    m.abs_da += x.abs_da;
    m.SM += x.SM;
  }
  const double n = static_cast<double>(all.size());
  m.R /= n;
  m.P /= n;
  m.abs_a /= n;
  m.abs_da /= n;
  m.SM /= n;
  return m;
}

struct RadarEntry {
  std::string key;
  std::optional<double> ratio;  // empty when the baseline value is zero
};

inline std::vector<RadarEntry> normalize_radar(const EpisodeMetrics& metrics, const EpisodeMetrics& baseline) {
  std::vector<RadarEntry> out;
  for (const char* key : kRadarKeys) {
    const double b = metric_value(baseline, key);
    if (b == 0.0) {
      out.push_back({key, std::nullopt});
    } else {
      out.push_back({key, metric_value(metrics, key) / b});
    }
  }
  return out;
}

inline nlohmann::json radar_to_json(const std::vector<RadarEntry>& entries) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : entries) j[e.key] = e.ratio ? nlohmann::json(*e.ratio) : nlohmann::json(nullptr);
  return j;
}

}  // namespace gqn
