#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "gqn/envs.hpp"

namespace {

using gqn::CartpoleSwingup;
using gqn::ControlLevel;
using gqn::PendulumSwingup;
using gqn::PointMass;
using gqn::Vector;

std::vector<double> act(std::initializer_list<double> a) { return a; }

TEST(Pendulum, UprightEquilibrium) {
  PendulumSwingup p;
  p.reset(0);
  p.set_state(0.0, 0.0);
  const auto r = p.step(act({0.0}));
  EXPECT_EQ(p.theta(), 0.0);
  EXPECT_EQ(p.theta_dot(), 0.0);
  EXPECT_EQ(r.raw_reward, 1.0);
  EXPECT_EQ(r.obs, (Vector{{1.0, 0.0, 0.0}}));
}

TEST(Pendulum, TorqueCannotLiftDirectly) {
  EXPECT_LT(PendulumSwingup::kMaxTorque, PendulumSwingup::kMass * PendulumSwingup::kGravity * PendulumSwingup::kLength);
  // Holding max torque from rest at the bottom never reaches the upper half.
  PendulumSwingup p;
  p.reset(0);
  p.set_state(std::numbers::pi, 0.0);
  for (int t = 0; t < 500; ++t) {
    const auto r = p.step(act({1.0}));
    EXPECT_LT(r.raw_reward, 0.5);
  }
}

TEST(Pendulum, ResetDistributionAndDeterminism) {
  PendulumSwingup a, b;
  EXPECT_EQ(a.reset(42), b.reset(42));
  std::set<double> thetas;
  for (std::uint64_t s = 0; s < 100; ++s) {
    a.reset(s);
    EXPECT_LE(std::abs(std::abs(a.theta()) - std::numbers::pi), 0.05 + 1e-12);
    EXPECT_LE(std::abs(a.theta_dot()), 0.05);
    thetas.insert(a.theta());
  }
  EXPECT_EQ(thetas.size(), 100u);
  EXPECT_EQ(a.reset(3).size(), a.spec().obs_dim);
}

TEST(Pendulum, TrajectoryIsPureFunctionOfSeedAndActions) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> actions(500);
  for (auto& x : actions) x = u(rng);
  PendulumSwingup a, b;
  a.reset(9);
  b.reset(9);
  for (double x : actions) {
    const auto ra = a.step(act({x}));
    const auto rb = b.step(act({x}));
    ASSERT_EQ(ra.obs, rb.obs);
    ASSERT_EQ(ra.raw_reward, rb.raw_reward);
  }
}

TEST(Pendulum, EnergyDriftUnforced) {
  // Semi-implicit Euler exactly conserves no energy; the mechanical energy
  // oscillates by O(dt) within each swing but does not accumulate. Two checks
  // against the potential range 2 * 15 = 30: the least-squares trend of E over
  // the episode, and the excursion of the integrator's modified energy
  // E + dt/2 * theta_dot * 15 sin(theta), which is conserved to O(dt^2).
  const double dt = 0.05;
  for (double theta0 : {0.3, 1.0, 2.0, 2.8, std::numbers::pi - 0.01}) {
    PendulumSwingup p;
    p.reset(0);
    p.set_state(theta0, 0.0);
    std::vector<double> e, shadow;
    for (int t = 0; t < 500; ++t) {
      p.step(act({0.0}));
      ASSERT_LT(std::abs(p.theta_dot()), PendulumSwingup::kMaxSpeed);
      e.push_back(p.energy());
      shadow.push_back(p.energy() + 0.5 * dt * p.theta_dot() * 15.0 * std::sin(p.theta()));
    }
    const double n = static_cast<double>(e.size());
    double mx = (n - 1) / 2, my = 0.0;
    for (double v : e) my += v / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) {
      sxy += (static_cast<double>(t) - mx) * (e[t] - my);
      sxx += (static_cast<double>(t) - mx) * (static_cast<double>(t) - mx);
    }
    EXPECT_LT(std::abs(sxy / sxx * n) / 30.0, 0.01) << "theta0=" << theta0;
    const auto [lo, hi] = std::minmax_element(shadow.begin(), shadow.end());
    EXPECT_LT((*hi - *lo) / 30.0, 0.01) << "theta0=" << theta0;
  }
}

TEST(Pendulum, RewardBounds) {
  PendulumSwingup p;
  p.reset(1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const auto r = p.step(act({u(rng)}));
    EXPECT_GE(r.raw_reward, 0.0);
    EXPECT_LE(r.raw_reward, 1.0);
    EXPECT_LE(std::abs(p.theta_dot()), 8.0);
    EXPECT_EQ(r.terminal, t == 499);
  }
  EXPECT_THROW(p.step(act({0.0})), gqn::ContractViolation);
}

TEST(Pendulum, RejectsOutOfBoundsAction) {
  PendulumSwingup p;
  p.reset(0);
  EXPECT_THROW(p.step(act({1.0001})), gqn::ContractViolation);
  EXPECT_THROW(p.step(act({0.0, 0.0})), gqn::ContractViolation);
  EXPECT_THROW(p.step(act({std::nan("")})), gqn::ContractViolation);
}

TEST(Cartpole, UprightEquilibrium) {
  CartpoleSwingup c;
  c.reset(0);
  c.set_state({});
  const auto r = c.step(act({0.0}));
  EXPECT_EQ(r.raw_reward, 1.0);
  EXPECT_EQ(c.state(), CartpoleSwingup::State{});
}

TEST(Cartpole, MirrorSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    CartpoleSwingup a, b;
    a.reset(0);
    b.reset(0);
    const CartpoleSwingup::State s{u(rng), u(rng), u(rng) * 3.0, u(rng)};
    a.set_state(s);
    b.set_state({-s.x, -s.x_dot, -s.theta, -s.theta_dot});
    for (int t = 0; t < 500; ++t) {
      const double x = u(rng);
      const auto ra = a.step(act({x}));
      const auto rb = b.step(act({-x}));
      const auto& sa = a.state();
      const auto& sb = b.state();
      ASSERT_NEAR(sa.x, -sb.x, 1e-9);
      ASSERT_NEAR(sa.x_dot, -sb.x_dot, 1e-9);
      ASSERT_NEAR(std::sin(sa.theta), -std::sin(sb.theta), 1e-9);
      ASSERT_NEAR(std::cos(sa.theta), std::cos(sb.theta), 1e-9);
      ASSERT_NEAR(sa.theta_dot, -sb.theta_dot, 1e-9);
      ASSERT_NEAR(ra.raw_reward, rb.raw_reward, 1e-9);
    }
  }
}

TEST(Cartpole, TrackClampZeroesVelocityAndReward) {
  CartpoleSwingup c;
  c.reset(0);
  c.set_state({2.39, 5.0, 0.0, 0.0});
  const auto r = c.step(act({1.0}));
  EXPECT_EQ(c.state().x, 2.4);
  EXPECT_EQ(c.state().x_dot, 0.0);
  EXPECT_EQ(r.raw_reward, 0.0);
}

TEST(Cartpole, DeterministicPerSeed) {
  CartpoleSwingup a, b;
  EXPECT_EQ(a.reset(11), b.reset(11));
  for (int t = 0; t < 100; ++t) EXPECT_EQ(a.step(act({0.3})).obs, b.step(act({0.3})).obs);
  EXPECT_EQ(a.spec().obs_dim, 5);
}

TEST(PointMass, AtTargetWithZeroVelocityScoresOne) {
  PointMass p(3, ControlLevel::velocity);
  p.reset(0);
  const Vector t = Vector::Constant(3, 0.2);
  p.set_state(t, Vector::Zero(3), t);
  EXPECT_EQ(p.step(act({0.0, 0.0, 0.0})).raw_reward, 1.0);
}

TEST(PointMass, TorqueModeIsScalarDoubleIntegrator) {
  PointMass p(1, ControlLevel::torque);
  p.reset(0);
  p.set_state(Vector::Zero(1), Vector::Zero(1), Vector::Constant(1, 1.0));
  double x = 0.0, v = 0.0;
  for (int t = 0; t < 40; ++t) {
    const double a = (t < 20) ? 1.0 : -0.5;
    p.step(act({a}));
    v += a * 0.05;
    x += v * 0.05;
    EXPECT_NEAR(p.position()[0], x, 1e-12);
    EXPECT_NEAR(p.velocity()[0], v, 1e-12);
  }
}

TEST(PointMass, VelocityModeSetsVelocity) {
  PointMass p(2, ControlLevel::velocity);
  p.reset(0);
  p.set_state(Vector::Zero(2), Vector::Zero(2), Vector::Zero(2));
  p.step(act({1.0, -0.5}));
  EXPECT_DOUBLE_EQ(p.velocity()[0], 0.5);
  EXPECT_DOUBLE_EQ(p.velocity()[1], -0.25);
  EXPECT_DOUBLE_EQ(p.position()[0], 0.025);
}

TEST(PointMass, BangBangVelocityControlCannotSettle) {
  // Each bang-bang step moves every coordinate by exactly 0.025, so the best
  // bang-bang policy alternates around the target and, per dimension,
  // alternates between distances d and 0.025 - d. Mean r^o over two steps is
  // largest at d = 0.0125, giving exp(-4 M 0.0125^2), strictly below 1. A fine-grained policy can hold the target exactly.
  // The position never rests: every step moves 0.5 * dt in each coordinate.
  for (int M : {1, 2}) {
    const double bound = std::exp(-4.0 * M * 0.0125 * 0.0125);
    ASSERT_LT(bound, 1.0);
    PointMass p(M, ControlLevel::velocity);
    p.reset(0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    Vector target(M);
    for (auto& v : target) v = u(rng);
    p.set_state(Vector::Zero(M), Vector::Zero(M), target);
    // Greedy bang-bang tracker: steps toward the target in every dimension.
    double total = 0.0;
    int steps = 0;
    for (int t = 0; t < 300; ++t) {
      std::vector<double> a(static_cast<std::size_t>(M));
      for (int j = 0; j < M; ++j) a[static_cast<std::size_t>(j)] = p.position()[j] < target[j] ? 1.0 : -1.0;
      const Vector prev = p.position();
      const auto r = p.step(a);
      for (int j = 0; j < M; ++j) EXPECT_NEAR(std::abs(p.position()[j] - prev[j]), 0.025, 1e-12);
      if (t >= 100) {
        total += r.raw_reward;
        ++steps;
      }
    }
    EXPECT_LE(total / steps, bound + 1e-12);

    PointMass fine(M, ControlLevel::velocity);
    fine.reset(0);
    fine.set_state(target, Vector::Zero(M), target);
    EXPECT_EQ(fine.step(std::vector<double>(static_cast<std::size_t>(M), 0.0)).raw_reward, 1.0);
  }
}

TEST(PointMass, ScalesToEightDimensions) {
  auto task = gqn::make_task("pointmass_nd8_torque");
  EXPECT_EQ(task->spec().action_dim, 8);
  EXPECT_EQ(task->spec().obs_dim, 16);
  task->reset(1);
  const auto r = task->step(std::vector<double>(8, 0.5));
  EXPECT_EQ(r.obs.size(), 16);
}

TEST(Penalty, StatedExample) {
  // r^o = 0.8 needs |pos - target|^2 = -ln(0.8) / 4.
  auto env = gqn::make_env("pointmass_nd2_velocity", 0.5);
  env->reset(0);
  auto& pm = dynamic_cast<PointMass&>(env->inner());
  const double d = std::sqrt(-std::log(0.8) / 4.0);
  // Velocity mode with a = (1, 1) moves 0.025 per axis; pre-offset so the post-step distance is d along x.
  pm.set_state(Vector{{-0.025 - d, -0.025}}, Vector::Zero(2), Vector::Zero(2));
  const auto r = env->step(act({1.0, 1.0}));
  EXPECT_NEAR(r.raw_reward, 0.8, 1e-12);
  EXPECT_NEAR(r.reward, -0.2, 1e-12);
}

TEST(Penalty, ZeroCoefficientOrZeroActionIsUnpenalized) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto free = gqn::make_env("pendulum_swingup", 0.0);
  auto costly = gqn::make_env("pendulum_swingup", 0.5);
  free->reset(1);
  costly->reset(1);
  for (int t = 0; t < 50; ++t) {
    const double x = u(rng);
    const auto r = free->step(act({x}));
    EXPECT_EQ(r.reward, r.raw_reward);
    const auto c = costly->step(act({0.0}));
    EXPECT_EQ(c.reward, c.raw_reward);
  }
  EXPECT_THROW(gqn::make_env("pendulum_swingup", -0.1), gqn::ConfigError);
}

TEST(Penalty, LowerBoundAndExactCost) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* id : {"pendulum_swingup", "cartpole_swingup", "pointmass_nd3_torque"}) {
    auto env = gqn::make_env(id, 0.1);
    env->reset(2);
    const int M = env->spec().action_dim;
    for (int t = 0; t < 200; ++t) {
      std::vector<double> a(static_cast<std::size_t>(M));
      double sq = 0.0;
      for (auto& x : a) {
        x = u(rng);
        sq += x * x;
      }
      const auto r = env->step(a);
      EXPECT_GE(r.raw_reward, 0.0);
      EXPECT_LE(r.raw_reward, 1.0);
      EXPECT_GE(r.reward, -0.1 * M);
      EXPECT_NEAR(r.raw_reward - r.reward, 0.1 * sq, 1e-15);
    }
  }
}

TEST(Registry, ParsesIdsAndRejectsUnknown) {
  EXPECT_EQ(gqn::make_task("pointmass_nd3_velocity")->spec().level, ControlLevel::velocity);
  EXPECT_EQ(gqn::make_task("cartpole_swingup")->spec().dt, 0.02);
  EXPECT_THROW(gqn::make_task("pointmass_nd0_torque"), gqn::ConfigError);
  EXPECT_THROW(gqn::make_task("humanoid_run"), gqn::ConfigError);
}

}  // namespace
