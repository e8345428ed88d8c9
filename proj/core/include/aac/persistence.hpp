#pragma once

#include <memory>

#include "aac/envs.hpp"

namespace aac {

// One wrapped environment step. Reward entries beyond the executed inner
// steps are exactly zero; the last element of `state` is the reported k.
struct Transition {
  Vector state;
  Vector action;
  Vector reward_array;  // length k_max
  Vector next_state;
  bool done = false;  // true termination only, never a time limit
  int k = 1;          // commanded persistence
};

struct PersistentStep {
  Transition transition;
  bool truncated = false;  // step budget exhausted; episode over, done stays false
};

// Repeats each commanded action k times against the wrapped environment,
// collects the per-inner-step reward array, and appends the (reported) k to
// every observation. The wrapped episode budget is floor(max_steps / k).
class PersistenceWrapper {
 public:
  PersistenceWrapper(std::unique_ptr<Env> env, int k_max);

  const EnvSpec& base_spec() const { return env_->spec(); }
  int obs_dim() const { return env_->spec().state_dim + 1; }
  int k_max() const { return k_max_; }
  int persistence() const { return k_; }
  int step_budget() const { return env_->spec().max_steps / k_; }
  bool episode_active() const { return active_; }
  int steps_taken() const { return steps_taken_; }

  // Takes effect immediately; ends any running episode.
  void set_persistence(int k);

  // Fix the k reported in observations regardless of the executed k.
  void set_misleading(bool on, int reported_k = 1);

  Vector reset(Rng& rng);
  PersistentStep step(const Vector& action, Rng& rng);

 private:
  Vector observe(const Vector& base_obs) const;
  int reported_k() const { return misleading_ ? reported_k_ : k_; }

  std::unique_ptr<Env> env_;
  int k_max_;
  int k_ = 1;
  bool misleading_ = false;
  int reported_k_ = 1;
  bool active_ = false;
  int steps_taken_ = 0;
  Vector last_obs_;  // wrapped observation, k slot included
};

}  // namespace aac
