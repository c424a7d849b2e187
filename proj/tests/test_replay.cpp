#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "gqn/replay.hpp"

namespace {

using gqn::EnvStep;
using gqn::NStepAccumulator;
using gqn::PrioritizedReplay;
using gqn::SumTree;
using gqn::Transition;
using gqn::Vector;

EnvStep step(double s, double r, bool terminal = false) {
  return {Vector::Constant(1, s), {static_cast<int>(s)}, r, Vector::Constant(1, s + 1), terminal};
}

Transition tagged(double tag) {
  Transition t;
  t.state = Vector::Constant(1, tag);
  t.action_bins = {0};
  t.bootstrap_state = Vector::Constant(1, tag);
  return t;
}

// Reference: collects the whole episode, then emits one transition per start index.
std::vector<Transition> naive_n_step(const std::vector<EnvStep>& episode, int n, double gamma) {
  std::vector<Transition> out;
  const int T = static_cast<int>(episode.size());
  const bool ends = episode.back().terminal;
  for (int t = 0; t < T; ++t) {
    const int last = std::min(t + n, T) - 1;
    const bool full = (last - t + 1) == n;
    if (!full && !ends) break;
    Transition tr;
    tr.state = episode[static_cast<std::size_t>(t)].state;
    tr.action_bins = episode[static_cast<std::size_t>(t)].action_bins;
    for (int k = t; k <= last; ++k) tr.n_step_reward += std::pow(gamma, k - t) * episode[static_cast<std::size_t>(k)].reward;
    tr.bootstrap_state = episode[static_cast<std::size_t>(last)].next_state;
    const bool hits_terminal = ends && last == T - 1;
    tr.bootstrap_discount = hits_terminal ? 0.0 : std::pow(gamma, n);
    out.push_back(tr);
  }
  return out;
}

TEST(NStep, SingleStepIsOneStepTransition) {
  NStepAccumulator acc(1, 0.9);
  auto out = acc.accumulate(step(0, 2.0));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].n_step_reward, 2.0);
  EXPECT_DOUBLE_EQ(out[0].bootstrap_discount, 0.9);
  EXPECT_EQ(out[0].bootstrap_state[0], 1.0);
}

TEST(NStep, ThreeStepRewardSum) {
  NStepAccumulator acc(3, 0.5);
  EXPECT_TRUE(acc.accumulate(step(0, 1.0)).empty());
  EXPECT_TRUE(acc.accumulate(step(1, 2.0)).empty());
  auto out = acc.accumulate(step(2, 4.0));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].n_step_reward, 1.0 + 0.5 * 2.0 + 0.25 * 4.0);
  EXPECT_DOUBLE_EQ(out[0].bootstrap_discount, 0.125);
  EXPECT_EQ(out[0].bootstrap_state[0], 3.0);
  EXPECT_EQ(out[0].state[0], 0.0);
}

TEST(NStep, TerminalInsideWindowFlushes) {
  NStepAccumulator acc(3, 0.9);
  acc.accumulate(step(0, 1.0));
  auto out = acc.accumulate(step(1, 1.0, true));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].n_step_reward, 1.9);
  EXPECT_EQ(out[0].bootstrap_discount, 0.0);
  EXPECT_EQ(out[1].n_step_reward, 1.0);
  EXPECT_EQ(out[1].bootstrap_discount, 0.0);
  EXPECT_EQ(acc.pending(), 0u);
}

TEST(NStep, MatchesNaiveOracleOnRandomEpisodes) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 20);
  for (int n : {1, 2, 3, 5}) {
    for (int trial = 0; trial < 50; ++trial) {
      const int T = len(rng);
      std::vector<EnvStep> ep;
      for (int t = 0; t < T; ++t) ep.push_back(step(t, u(rng), t == T - 1));
      NStepAccumulator acc(n, 0.97);
      std::vector<Transition> got;
      for (const auto& s : ep) {
        for (auto& t : acc.accumulate(s)) got.push_back(std::move(t));
      }
      const auto want = naive_n_step(ep, n, 0.97);
      ASSERT_EQ(got.size(), want.size()) << "n=" << n << " T=" << T;
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].state, want[i].state);
        EXPECT_NEAR(got[i].n_step_reward, want[i].n_step_reward, 1e-12);
        EXPECT_EQ(got[i].bootstrap_state, want[i].bootstrap_state);
        EXPECT_NEAR(got[i].bootstrap_discount, want[i].bootstrap_discount, 1e-15);
      }
    }
  }
}

TEST(SumTree, TotalMatchesNaiveSumUnderRandomUpdates) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::uniform_int_distribution<std::size_t> leaf(0, 36);
  SumTree tree(37);
  EXPECT_EQ(tree.capacity(), 64u);
  std::vector<double> naive(37, 0.0);
  for (int k = 0; k < 5000; ++k) {
    const std::size_t i = leaf(rng);
    naive[i] = u(rng);
    tree.set(i, naive[i]);
    if (k % 97 == 0) {
      double s = 0.0;
      for (double v : naive) s += v;
      EXPECT_NEAR(tree.total(), s, 1e-9);
    }
  }
  const auto& nodes = tree.nodes();
  for (std::size_t i = 1; i < tree.capacity(); ++i) EXPECT_NEAR(nodes[i], nodes[2 * i] + nodes[2 * i + 1], 1e-12);
}

TEST(SumTree, FindMatchesLinearScan) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SumTree tree(10);
  std::vector<double> p(10);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = (i % 3 == 1) ? 0.0 : u(rng);
    tree.set(i, p[i]);
  }
  for (int k = 0; k < 2000; ++k) {
    const double prefix = u(rng) * tree.total();
    std::size_t want = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0 && prefix < acc + p[i]) {
        want = i;
        break;
      }
      acc += p[i];
    }
    const std::size_t got = tree.find(prefix);
    EXPECT_GT(tree.get(got), 0.0);
    // Boundary round-off may shift by one nonzero leaf; require exact match away from edges.
    if (std::abs(prefix - acc) > 1e-12 && std::abs(prefix - acc - p[want]) > 1e-12) EXPECT_EQ(got, want);
  }
}

TEST(SumTree, RejectsBadPriority) {
  SumTree tree(4);
  EXPECT_THROW(tree.set(0, -1.0), gqn::ContractViolation);
  EXPECT_THROW(tree.set(0, std::nan("")), gqn::ContractViolation);
  EXPECT_THROW(tree.set(4, 1.0), gqn::ContractViolation);
}

TEST(Replay, NewTransitionsGetMaxPriority) {
  PrioritizedReplay r({8, 0.6, 1e-3});
  r.push(tagged(0));
  EXPECT_EQ(r.priority(0), 1.0);
  r.set_priority(0, 4.0);
  r.push(tagged(1));
  EXPECT_EQ(r.priority(1), 4.0);
}

TEST(Replay, PriorityFollowsAlphaPower) {
  PrioritizedReplay r({8, 0.6, 1e-3});
  r.push(tagged(0));
  r.push(tagged(1));
  std::mt19937_64 rng(1);
  auto s = r.sample(2, 0.4, rng);
  Vector td(2);
  td << 0.5, -2.0;
  r.update_priorities(s.handles, td);
  EXPECT_NEAR(r.priority(s.handles[0].slot), std::pow(0.5 + 1e-3, 0.6), 1e-14);
  EXPECT_NEAR(r.priority(s.handles[1].slot), std::pow(2.0 + 1e-3, 0.6), 1e-14);
}

TEST(Replay, ZeroErrorKeepsPositivePriority) {
  PrioritizedReplay r({4, 0.6, 1e-3});
  r.push(tagged(0));
  r.update_priorities({{0, 1}}, Vector::Zero(1));
  EXPECT_NEAR(r.priority(0), std::pow(1e-3, 0.6), 1e-15);
  EXPECT_GT(r.priority(0), 0.0);
}

TEST(Replay, SamplingFrequenciesMatchPriorities) {
  PrioritizedReplay r({4, 1.0, 1e-3});
  for (int i = 0; i < 4; ++i) r.push(tagged(i));
  const std::vector<double> p{1.0, 2.0, 3.0, 4.0};
  for (std::size_t i = 0; i < 4; ++i) r.set_priority(i, p[i]);
  std::mt19937_64 rng(9);
  std::map<double, int> counts;
  const int draws = 25000;
  for (int k = 0; k < draws; ++k) {
    auto s = r.sample(4, 0.0, rng);
    for (const auto* t : s.transitions) ++counts[t->state[0]];
  }
  for (int i = 0; i < 4; ++i) {
    const double expect = p[static_cast<std::size_t>(i)] / 10.0;
    const double freq = counts[i] / (4.0 * draws);
    EXPECT_NEAR(freq, expect, 0.01) << "slot " << i;
  }
}

TEST(Replay, ImportanceWeightsBetaOneRecoverUniformity) {
  PrioritizedReplay r({4, 1.0, 1e-3});
  for (int i = 0; i < 4; ++i) r.push(tagged(i));
  const std::vector<double> p{1.0, 2.0, 3.0, 4.0};
  for (std::size_t i = 0; i < 4; ++i) r.set_priority(i, p[i]);
  std::mt19937_64 rng(11);
  // With beta = 1, w_i * P(i) is constant; the weighted sampling distribution is uniform.
  for (int rep = 0; rep < 50; ++rep) {
    auto s = r.sample(4, 1.0, rng);
    double min_p = 1.0;
    for (std::size_t c = 0; c < 4; ++c) min_p = std::min(min_p, p[s.handles[c].slot] / 10.0);
    for (std::size_t b = 0; b < 4; ++b) {
      const double pi = p[s.handles[b].slot] / 10.0;
      const double w = s.importance_weights[static_cast<Eigen::Index>(b)];
      EXPECT_LE(w, 1.0);
      EXPECT_NEAR(w, min_p / pi, 1e-12);
    }
    EXPECT_DOUBLE_EQ(s.importance_weights.maxCoeff(), 1.0);
  }
}

TEST(Replay, ImportanceWeightsBetaZeroAreOne) {
  PrioritizedReplay r({4, 1.0, 1e-3});
  for (int i = 0; i < 4; ++i) r.push(tagged(i));
  r.set_priority(2, 5.0);
  std::mt19937_64 rng(11);
  auto s = r.sample(4, 0.0, rng);
  for (Eigen::Index b = 0; b < 4; ++b) EXPECT_EQ(s.importance_weights[b], 1.0);
}

TEST(Replay, RingBufferEvictsOldest) {
  PrioritizedReplay r({3, 0.6, 1e-3});
  for (int i = 0; i < 5; ++i) r.push(tagged(i));
  EXPECT_EQ(r.size(), 3u);
  EXPECT_EQ(r.at(0).state[0], 3.0);
  EXPECT_EQ(r.at(1).state[0], 4.0);
  EXPECT_EQ(r.at(2).state[0], 2.0);
}

TEST(Replay, StaleHandleUpdatesAreSkipped) {
  PrioritizedReplay r({2, 0.6, 1e-3});
  r.push(tagged(0));
  r.push(tagged(1));
  std::mt19937_64 rng(2);
  auto s = r.sample(2, 0.4, rng);
  r.push(tagged(2));
  r.push(tagged(3));
  const double before0 = r.priority(0);
  const double before1 = r.priority(1);
  r.update_priorities(s.handles, Vector::Constant(2, 10.0));
  EXPECT_EQ(r.priority(0), before0);
  EXPECT_EQ(r.priority(1), before1);
  EXPECT_EQ(r.stale_updates(), 2u);
}

TEST(Replay, SampleRequiresEnoughTransitions) {
  PrioritizedReplay r({8, 0.6, 1e-3});
  r.push(tagged(0));
  std::mt19937_64 rng(1);
  EXPECT_THROW(r.sample(2, 0.4, rng), gqn::ContractViolation);
}

TEST(Replay, JsonRoundTripPreservesSampling) {
  PrioritizedReplay r({5, 0.6, 1e-3});
  for (int i = 0; i < 7; ++i) r.push(tagged(i));
  r.set_priority(3, 2.5);
  const auto back = PrioritizedReplay::from_json(nlohmann::json::from_cbor(nlohmann::json::to_cbor(r.to_json())));
  std::mt19937_64 a(8), b(8);
  const auto sa = r.sample(5, 0.5, a);
  const auto sb = back.sample(5, 0.5, b);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(sa.handles[i].slot, sb.handles[i].slot);
    EXPECT_EQ(sa.handles[i].generation, sb.handles[i].generation);
  }
  EXPECT_EQ(sa.importance_weights, sb.importance_weights);
  EXPECT_EQ(back.max_priority(), r.max_priority());
  auto back2 = back;
  back2.push(tagged(99));
  EXPECT_EQ(back2.at(2).state[0], 99.0);
}

}  // namespace
