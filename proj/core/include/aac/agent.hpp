#pragma once

#include <string>

#include "aac/policy.hpp"
#include "aac/replay.hpp"

namespace aac {

// The evolved tuple (a, c, h, k, g) with derived discount and target entropy.
struct HyperParams {
  int actor_updates = 1;        // a
  int critic_updates = 1;       // c
  double entropy_scale = 1.0;   // h
  int persistence = 1;          // k
  double discount_exp = -4.6051701859880914;  // g; default gives gamma 0.99

  double gamma() const { return 1.0 - std::exp(discount_exp); }
  double target_entropy(int action_dim) const {
    return entropy_scale * -static_cast<double>(action_dim);
  }
};

struct AgentConfig {
  int obs_dim = 0;     // includes the appended k slot
  int action_dim = 0;  // |A|
  std::vector<int> hidden = {256, 256};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 1e-4;
  double init_alpha = 0.1;
  int batch_size = 512;
  bool entropy_in_actor_loss = true;
};

// Actor outputs with reparameterized samples for a batch of states.
struct PolicySample {
  Matrix mean, log_std;    // log_std already clamped
  Matrix noise;            // z ~ N(0, I)
  Matrix pre_squash;       // mean + std .* z
  Matrix action;           // tanh(pre_squash)
  Vector log_prob;         // per row, summed over dimensions
  Matrix clamp_mask;       // 1 where the raw log-std was inside the clamp range
};

struct TdTargets {
  Vector targets;
  Matrix next_actions;      // the a~' sample used in the bootstrap
  Vector next_log_prob;
  Vector frozen_q1, frozen_q2;  // critic values at (s', a~') before any update
};

struct StepMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;  // -mean log pi
  double gamma = 0.0;
  double target_entropy = 0.0;
  int critic_update_calls = 0;
  int actor_update_calls = 0;
};

// One SAC-style learner: squashed-Gaussian actor, twin critics, learned
// temperature. No target networks; the TD bootstrap uses the online critics
// with gradients blocked, stabilized by the self-regularizing penalty.
struct Agent {
  AgentConfig cfg;
  HyperParams hp;
  DenseNet actor;            // obs -> [mean, log_std]
  DenseNet critic1, critic2; // obs ++ action -> scalar
  AdamState actor_opt, critic1_opt, critic2_opt;
  ScalarAdam alpha_opt;
  double log_alpha = 0.0;

  Agent(const AgentConfig& config, Rng& rng);

  double alpha() const { return std::exp(log_alpha); }

  Vector act(const Vector& state, bool stochastic, Rng& rng) const;

  // Reparameterized policy forward for a batch of states. Fills `cache`
  // (when given) so gradients can flow back through the actor.
  PolicySample sample_policy(const Matrix& states, Rng& rng,
                             NetCache* cache = nullptr) const;

  // Per-row target: sum_j gamma^j rhat[j] + (1-d) gamma^{k+1} (minQ - alpha logpi).
  // The bootstrap sample a~' is drawn fresh; no gradient flows through it.
  TdTargets td_targets(const Batch& batch, double gamma, Rng& rng) const;

  // One Adam step per critic on a fresh batch; returns the combined loss
  // (TD term plus self-regularizer) evaluated before the step.
  double critic_update(const ReplayBuffer& buffer, double gamma, Rng& rng);

  // One Adam step on the actor, then one on log-alpha; fresh batch.
  // Returns (actor loss, entropy estimate).
  std::pair<double, double> actor_update(const ReplayBuffer& buffer,
                                         double target_entropy, Rng& rng);

  // c critic updates then a actor updates, each on a fresh batch; gamma and
  // target entropy are recomputed from the current hyperparameters.
  StepMetrics train_step(const ReplayBuffer& buffer, Rng& rng);

  void save(const std::string& path) const;
  static Agent load(const std::string& path);
};

// Sum of gamma^j * reward_array[row][j] for each row.
Vector discount_reward_rows(const Matrix& reward_array, double gamma);

// Gradient plumbing shared with the baseline update rules.
namespace detail {

// Builds dL/d(raw actor output) from dL/d(action) and the per-row weight on
// d(log pi); applies the log-std clamp mask.
Matrix actor_output_grad(const PolicySample& ps, const Matrix& dL_daction,
                         double dL_dlogp_weight);

// dL/d(action input) of a clipped-double critic evaluated at rows X=[s,a],
// where the loss is -mean(min(Q1,Q2)). Also returns the per-row min.
struct CriticActionGrad {
  Matrix daction;
  Vector q_min;
};
CriticActionGrad min_critic_action_grad(const DenseNet& critic1,
                                        const DenseNet& critic2,
                                        const Matrix& states,
                                        const Matrix& actions);

}  // namespace detail

}  // namespace aac
