#pragma once

#include <memory>
#include <string>

#include "aac/net.hpp"
#include "aac/rng.hpp"

namespace aac {

struct EnvSpec {
  int state_dim = 0;   // base observation size, excluding the appended k slot
  int action_dim = 0;  // |A|
  int max_steps = 0;   // base step limit, before division by k
  std::string reward_note;
};

struct StepResult {
  Vector obs;
  double reward = 0.0;
  bool terminal = false;  // true termination only; time limits live in the wrapper
};

// Actions are in [-1,1] per dimension; environments rescale internally.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(Rng& rng) = 0;
  virtual StepResult step(const Vector& action, Rng& rng) = 0;
};

// Classic torque-limited swing-up. Observation (cos th, sin th, thdot).
class PendulumEnv : public Env {
 public:
  const EnvSpec& spec() const override;
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action, Rng& rng) override;

  // Exposed for direct dynamics tests.
  void set_state(double theta, double theta_dot);
  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

 private:
  Vector observe() const;
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

// 2-D double integrator with velocity damping; reward is -distance to origin.
class PointMassEnv : public Env {
 public:
  const EnvSpec& spec() const override;
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action, Rng& rng) override;

  void set_state(const Vector& pos, const Vector& vel);

 private:
  Vector pos_{2}, vel_{2};
};

// Daily order-quantity control under drifting Poisson demand.
class NewsvendorEnv : public Env {
 public:
  const EnvSpec& spec() const override;
  Vector reset(Rng& rng) override;
  StepResult step(const Vector& action, Rng& rng) override;

  // Deterministic single-day accounting, used both by step() and by tests.
  static double day_reward(double inventory, double order, double demand,
                           double* end_inventory);

  void set_state(double inventory, double lambda, int day);

 private:
  Vector observe() const;
  static constexpr int kHorizon = 40;
  static constexpr double kMaxOrder = 50.0;
  double inventory_ = 0.0;
  double lambda_ = 25.0;
  double demand_history_[5] = {0, 0, 0, 0, 0};
  int day_ = 0;
};

// Throws std::invalid_argument on unknown id.
std::unique_ptr<Env> make_env(const std::string& id);

}  // namespace aac
