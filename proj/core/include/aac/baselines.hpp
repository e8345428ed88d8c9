#pragma once

#include "aac/agent.hpp"
#include "aac/evolution.hpp"

namespace aac {

enum class BaselineVariant { Sac, SrSac, KSac, RandSac };

std::string variant_name(BaselineVariant v);

struct BaselineConfig {
  BaselineVariant variant = BaselineVariant::Sac;
  double tau = 0.005;
  int target_delay = 2;
  double gamma = 0.99;
  int actor_updates = 1;
  int critic_updates = 1;
  double entropy_scale = 1.0;  // H = entropy_scale * -|A|
  int persistence = 1;
  long warmup_steps = 1000;
  double sr_beta_init = 70.0;
  double sr_beta_final = 90.0;
  int sr_max_inner = 64;  // hard cap on repeated updates per batch
};

// Polyak copies of the two online critics.
struct TargetNets {
  DenseNet critic1, critic2;
  int update_counter = 0;
  int delay = 2;

  TargetNets(const Agent& agent, int delay);
};

// target <- (1 - tau) * target + tau * online, elementwise.
void polyak_update(DenseNet& target, const DenseNet& online, double tau);

struct BaselineStepMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
  int critic_inner_updates = 0;  // SR-SAC loop count
};

// Standard SAC: critic regression to the target-network bootstrap (no
// self-regularizer), then actor + temperature updates, then a polyak update
// every `target_delay` calls.
BaselineStepMetrics sac_train_step(Agent& agent, TargetNets& targets,
                                   const ReplayBuffer& buffer,
                                   const BaselineConfig& cfg, Rng& rng);

// Self-regularized SAC: no target networks; the update repeats on the same
// batch until the combined loss drops below beta(progress)% of its value
// before the first step, or the hard cap is reached. `progress` in [0,1]
// linearly interpolates beta between sr_beta_init and sr_beta_final.
BaselineStepMetrics sr_sac_train_step(Agent& agent, const ReplayBuffer& buffer,
                                      const BaselineConfig& cfg,
                                      double progress, Rng& rng);

double sr_beta_at(const BaselineConfig& cfg, double progress);

// ---------------------------------------------------------------- k-SAC

enum class KScheduleKind { Incremental, Sampled, DelayedSampled };

// Picks the training persistence for each evaluation period. Thompson
// sampling models the per-k return as a Normal with the running mean and
// variance of observed evaluation returns.
class KScheduler {
 public:
  KScheduler(KScheduleKind kind, int k_min, int k_max);

  int next_k(Rng& rng);
  void record(int k, double eval_return);

  double mean(int k) const;
  long count(int k) const;

 private:
  struct Stats {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  KScheduleKind kind_;
  int k_min_, k_max_;
  int period_ = 0;
  std::vector<Stats> stats_;
};

// Samples (a, c, h, k, g) from the evolution search ranges and tau uniformly
// from [0.001, 0.05]; everything else stays at the literature defaults.
BaselineConfig rand_sac_make(const EvolutionConfig& ranges, Rng& rng);

}  // namespace aac
