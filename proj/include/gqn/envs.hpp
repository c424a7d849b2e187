#pragma once

// Deterministic desk-scale control tasks. Agent-side actions live in
// [-1, 1]^M; each task scales them to physical units. Episodes have a fixed
// horizon and no early termination. Integration is semi-implicit Euler.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <vector>

#include "gqn/error.hpp"
#include "gqn/nn.hpp"

namespace gqn {

enum class ControlLevel { torque, velocity };

struct EnvSpec {
  std::string id;
  int obs_dim = 0;
  int action_dim = 0;
  std::vector<double> control_scale;
  double dt = 0.05;
  int horizon = 1;
  ControlLevel level = ControlLevel::torque;
};

struct StepResult {
  Vector obs;
  double reward = 0.0;      // after the action penalty
  double raw_reward = 0.0;  // task reward r^o
  bool terminal = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const double> action) = 0;

 protected:
  static void check_action(const EnvSpec& spec, std::span<const double> action) {
    if (static_cast<int>(action.size()) != spec.action_dim) {
      throw ContractViolation(spec.id + ": action has " + std::to_string(action.size()) + " components, expected " +
                              std::to_string(spec.action_dim));
    }
    for (double a : action) {
      if (!(a >= -1.0 && a <= 1.0)) throw ContractViolation(spec.id + ": action component outside [-1, 1]");
    }
  }
};

// Common bookkeeping for the concrete tasks: step counting and the horizon.
class Task : public Environment {
 public:
  explicit Task(EnvSpec spec) : spec_(std::move(spec)) {}

  const EnvSpec& spec() const override { return spec_; }
  int steps_taken() const { return steps_; }

  Vector reset(std::uint64_t seed) override {
    std::mt19937_64 rng(seed);
    steps_ = 0;
    randomize(rng);
    return observe();
  }

  StepResult step(std::span<const double> action) override {
    check_action(spec_, action);
    if (steps_ >= spec_.horizon) throw ContractViolation(spec_.id + ": step after the episode ended");
    integrate(action);
    ++steps_;
    StepResult r;
    r.obs = observe();
    r.raw_reward = task_reward();
    r.reward = r.raw_reward;
    r.terminal = steps_ >= spec_.horizon;
    return r;
  }

  virtual Vector observe() const = 0;
  virtual double task_reward() const = 0;

 protected:
  virtual void randomize(std::mt19937_64& rng) = 0;
  virtual void integrate(std::span<const double> action) = 0;

  EnvSpec spec_;
  int steps_ = 0;
};

// theta = 0 upright, theta = pi hanging. Max torque 2 cannot lift the pole
// directly against gravity (m g l = 10), so swing-up needs pumping.
class PendulumSwingup : public Task {
 public:
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kGravity = 10.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;

  PendulumSwingup() : Task({"pendulum_swingup", 3, 1, {kMaxTorque}, 0.05, 500, ControlLevel::torque}) {}

  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }
  void set_state(double theta, double theta_dot) {
    theta_ = theta;
    theta_dot_ = theta_dot;
  }

  // Conserved quantity of the unforced dynamics (per unit inertia).
  double energy() const { return 0.5 * theta_dot_ * theta_dot_ + 1.5 * kGravity / kLength * std::cos(theta_); }

  Vector observe() const override { return Vector{{std::cos(theta_), std::sin(theta_), theta_dot_}}; }
  double task_reward() const override { return 0.5 * (1.0 + std::cos(theta_)); }

 protected:
  void randomize(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    theta_ = std::numbers::pi + noise(rng);
    theta_dot_ = noise(rng);
  }

  void integrate(std::span<const double> action) override {
    const double u = kMaxTorque * action[0];
    // -sin(theta + pi) == sin(theta), written without the rounding of theta + pi.
    const double acc = 1.5 * kGravity / kLength * std::sin(theta_) + 3.0 * u / (kMass * kLength * kLength);
    theta_dot_ = std::clamp(theta_dot_ + acc * spec_.dt, -kMaxSpeed, kMaxSpeed);
    theta_ = std::remainder(theta_ + theta_dot_ * spec_.dt, 2.0 * std::numbers::pi);
  }

 private:
  double theta_ = std::numbers::pi;
  double theta_dot_ = 0.0;
};

// Cart-pole with theta = 0 upright; starts hanging. The cart is clamped to
// the track with its velocity zeroed, and earns nothing while pinned.
class CartpoleSwingup : public Task {
 public:
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kGravity = 9.8;
  static constexpr double kForce = 10.0;
  static constexpr double kTrack = 2.4;

  struct State {
    double x = 0.0, x_dot = 0.0, theta = 0.0, theta_dot = 0.0;
    bool operator==(const State&) const = default;
  };

  CartpoleSwingup() : Task({"cartpole_swingup", 5, 1, {kForce}, 0.02, 500, ControlLevel::torque}) {}

  const State& state() const { return s_; }
  void set_state(const State& s) { s_ = s; }

  Vector observe() const override {
    return Vector{{s_.x, s_.x_dot, std::cos(s_.theta), std::sin(s_.theta), s_.theta_dot}};
  }
  double task_reward() const override {
    const double in_bounds = std::abs(s_.x) < kTrack ? 1.0 : 0.0;
    return 0.5 * (1.0 + std::cos(s_.theta)) * in_bounds;
  }

 protected:
  void randomize(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    s_.x = noise(rng);
    s_.x_dot = noise(rng);
    s_.theta = std::numbers::pi + noise(rng);
    s_.theta_dot = noise(rng);
  }

  void integrate(std::span<const double> action) override {
    const double force = kForce * action[0];
    const double total = kCartMass + kPoleMass;
    const double pml = kPoleMass * kHalfLength;
    const double sin_t = std::sin(s_.theta);
    const double cos_t = std::cos(s_.theta);
    const double temp = (force + pml * s_.theta_dot * s_.theta_dot * sin_t) / total;
    const double theta_acc =
        (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total));
    const double x_acc = temp - pml * theta_acc * cos_t / total;
    const double dt = spec_.dt;
    s_.x_dot += x_acc * dt;
    s_.x += s_.x_dot * dt;
    s_.theta_dot += theta_acc * dt;
    s_.theta = std::remainder(s_.theta + s_.theta_dot * dt, 2.0 * std::numbers::pi);
    if (s_.x > kTrack || s_.x < -kTrack) {
      s_.x = std::clamp(s_.x, -kTrack, kTrack);
      s_.x_dot = 0.0;
    }
  }

 private:
  State s_;
};

// M-dimensional point mass reaching a per-episode target. Torque level:
// actions are accelerations; velocity level: actions set the velocity.
class PointMass : public Task {
 public:
  static constexpr double kBox = 2.0;

  PointMass(int action_dim, ControlLevel level)
      : Task({make_id(action_dim, level), 2 * action_dim, action_dim,
              std::vector<double>(static_cast<std::size_t>(std::max(action_dim, 0)),
                                  level == ControlLevel::torque ? 1.0 : 0.5),
              0.05, 300, level}) {
    if (action_dim < 1) throw ConfigError("pointmass: action_dim must be >= 1");
    pos_ = vel_ = target_ = Vector::Zero(action_dim);
  }

  static std::string make_id(int m, ControlLevel level) {
    return "pointmass_nd" + std::to_string(m) + (level == ControlLevel::torque ? "_torque" : "_velocity");
  }

  const Vector& position() const { return pos_; }
  const Vector& velocity() const { return vel_; }
  const Vector& target() const { return target_; }
  void set_state(const Vector& pos, const Vector& vel, const Vector& target) {
    pos_ = pos;
    vel_ = vel;
    target_ = target;
  }

  Vector observe() const override {
    Vector obs(2 * spec_.action_dim);
    obs << pos_ - target_, vel_;
    return obs;
  }
  double task_reward() const override { return std::exp(-4.0 * (pos_ - target_).squaredNorm()); }

 protected:
  void randomize(std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int j = 0; j < spec_.action_dim; ++j) target_[j] = unit(rng);
    for (int j = 0; j < spec_.action_dim; ++j) pos_[j] = unit(rng);
    vel_.setZero();
  }

  void integrate(std::span<const double> action) override {
    const double dt = spec_.dt;
    for (int j = 0; j < spec_.action_dim; ++j) {
      const double u = spec_.control_scale[static_cast<std::size_t>(j)] * action[static_cast<std::size_t>(j)];
      if (spec_.level == ControlLevel::torque) {
        vel_[j] += u * dt;
      } else {
        vel_[j] = u;
      }
      pos_[j] += vel_[j] * dt;
      if (pos_[j] > kBox || pos_[j] < -kBox) {
        pos_[j] = std::clamp(pos_[j], -kBox, kBox);
        vel_[j] = 0.0;
      }
    }
  }

 private:
  Vector pos_, vel_, target_;
};

// r = r^o - c_a * sum_j a_j^2, with a in agent-side units.
class PenaltyWrapper : public Environment {
 public:
  PenaltyWrapper(std::unique_ptr<Environment> inner, double penalty) : inner_(std::move(inner)), penalty_(penalty) {
    if (!(penalty >= 0.0)) throw ConfigError("action penalty must be >= 0");
  }

  const EnvSpec& spec() const override { return inner_->spec(); }
  Vector reset(std::uint64_t seed) override { return inner_->reset(seed); }

  StepResult step(std::span<const double> action) override {
    check_action(spec(), action);
    StepResult r = inner_->step(action);
    double sq = 0.0;
    for (double a : action) sq += a * a;
    r.reward = r.raw_reward - penalty_ * sq;
    return r;
  }

  double penalty() const { return penalty_; }
  Environment& inner() { return *inner_; }

 private:
  std::unique_ptr<Environment> inner_;
  double penalty_;
};

inline std::unique_ptr<Task> make_task(const std::string& id) {
  if (id == "pendulum_swingup") return std::make_unique<PendulumSwingup>();
  if (id == "cartpole_swingup") return std::make_unique<CartpoleSwingup>();
  static const std::regex pointmass(R"(pointmass_nd([1-9][0-9]*)_(torque|velocity))");
  std::smatch m;
  if (std::regex_match(id, m, pointmass)) {
    return std::make_unique<PointMass>(std::stoi(m[1].str()),
                                       m[2].str() == "torque" ? ControlLevel::torque : ControlLevel::velocity);
  }
  throw ConfigError("unknown environment id '" + id +
                    "' (expected pendulum_swingup, cartpole_swingup or pointmass_nd{M}_{torque|velocity})");
}

inline std::unique_ptr<PenaltyWrapper> make_env(const std::string& id, double penalty) {
  return std::make_unique<PenaltyWrapper>(make_task(id), penalty);
}

}  // namespace gqn
