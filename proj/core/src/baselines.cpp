#include "aac/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aac {

namespace {

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

std::string variant_name(BaselineVariant v) {
  switch (v) {
    case BaselineVariant::Sac: return "sac";
    case BaselineVariant::SrSac: return "sr-sac";
    case BaselineVariant::KSac: return "k-sac";
    case BaselineVariant::RandSac: return "rand-sac";
  }
  return "unknown";
}

TargetNets::TargetNets(const Agent& agent, int delay_)
    : critic1(agent.critic1), critic2(agent.critic2), delay(delay_) {}

void polyak_update(DenseNet& target, const DenseNet& online, double tau) {
  if (!target.same_shape(online)) {
    throw std::invalid_argument("polyak_update: shape mismatch");
  }
  for (int l = 0; l < target.num_layers(); ++l) {
    target.weights()[l] = (1.0 - tau) * target.weights()[l] +
                          tau * online.weights()[l];
    target.biases()[l] = (1.0 - tau) * target.biases()[l] +
                         tau * online.biases()[l];
  }
}

BaselineStepMetrics sac_train_step(Agent& agent, TargetNets& targets,
                                   const ReplayBuffer& buffer,
                                   const BaselineConfig& cfg, Rng& rng) {
  BaselineStepMetrics m;
  const double gamma = cfg.gamma;
  const double target_entropy =
      cfg.entropy_scale * -static_cast<double>(agent.cfg.action_dim);

  for (int c = 0; c < cfg.critic_updates; ++c) {
    const Batch batch = buffer.sample(agent.cfg.batch_size, rng);
    const double n = static_cast<double>(batch.size());
    // Bootstrap from the polyak target critics.
    const PolicySample ps = agent.sample_policy(batch.next_state, rng);
    const Matrix x2 = concat_cols(batch.next_state, ps.action);
    const Vector q1t = targets.critic1.forward(x2).col(0);
    const Vector q2t = targets.critic2.forward(x2).col(0);
    const Vector boot =
        q1t.cwiseMin(q2t) - agent.alpha() * ps.log_prob;
    Vector y = discount_reward_rows(batch.reward_array, gamma);
    for (int r = 0; r < y.size(); ++r) {
      y(r) += (1.0 - batch.done(r)) * std::pow(gamma, batch.k[r] + 1) * boot(r);
    }
    const Matrix x = concat_cols(batch.state, batch.action);
    auto update_one = [&](DenseNet& critic, AdamState& opt) {
      NetCache cache;
      const Vector q = critic.forward(x, &cache).col(0);
      const Vector err = q - y;
      m.critic_loss += err.squaredNorm() / n;
      NetGrads grads = critic.zero_grads();
      critic.backward(cache, (2.0 / n) * err, &grads);
      adam_step(critic, grads, opt);
    };
    update_one(agent.critic1, agent.critic1_opt);
    update_one(agent.critic2, agent.critic2_opt);
    m.critic_inner_updates += 1;
  }
  m.critic_loss /= 2.0 * cfg.critic_updates;

  for (int a = 0; a < cfg.actor_updates; ++a) {
    const auto [loss, entropy] = agent.actor_update(buffer, target_entropy, rng);
    m.actor_loss += loss;
    m.entropy = entropy;
  }
  m.actor_loss /= cfg.actor_updates;
  m.alpha = agent.alpha();

  targets.update_counter += 1;
  if (targets.update_counter % targets.delay == 0) {
    polyak_update(targets.critic1, agent.critic1, cfg.tau);
    polyak_update(targets.critic2, agent.critic2, cfg.tau);
  }
  return m;
}

double sr_beta_at(const BaselineConfig& cfg, double progress) {
  const double p = std::clamp(progress, 0.0, 1.0);
  return cfg.sr_beta_init + p * (cfg.sr_beta_final - cfg.sr_beta_init);
}

BaselineStepMetrics sr_sac_train_step(Agent& agent, const ReplayBuffer& buffer,
                                      const BaselineConfig& cfg,
                                      double progress, Rng& rng) {
  BaselineStepMetrics m;
  const double gamma = cfg.gamma;
  const double target_entropy =
      cfg.entropy_scale * -static_cast<double>(agent.cfg.action_dim);
  const double beta = sr_beta_at(cfg, progress);

  const Batch batch = buffer.sample(agent.cfg.batch_size, rng);
  const double n = static_cast<double>(batch.size());
  // Targets and regularizer anchors are frozen before the first step and
  // held fixed across the inner loop.
  const TdTargets td = agent.td_targets(batch, gamma, rng);
  const Matrix x = concat_cols(batch.state, batch.action);
  const Matrix x2 = concat_cols(batch.next_state, td.next_actions);

  auto combined_loss = [&]() {
    const Vector e1 = agent.critic1.forward(x).col(0) - td.targets;
    const Vector e2 = agent.critic2.forward(x).col(0) - td.targets;
    const Vector r1 = agent.critic1.forward(x2).col(0) - td.frozen_q1;
    const Vector r2 = agent.critic2.forward(x2).col(0) - td.frozen_q2;
    return (e1.squaredNorm() + r1.squaredNorm() + e2.squaredNorm() +
            r2.squaredNorm()) /
           (2.0 * n);
  };

  const double initial_loss = combined_loss();
  double loss = initial_loss;
  int inner = 0;
  while (inner < cfg.sr_max_inner) {
    auto update_one = [&](DenseNet& critic, AdamState& opt, const Vector& frozen) {
      NetCache td_cache, reg_cache;
      const Vector q = critic.forward(x, &td_cache).col(0);
      const Vector q_next = critic.forward(x2, &reg_cache).col(0);
      NetGrads grads = critic.zero_grads();
      critic.backward(td_cache, (2.0 / n) * (q - td.targets), &grads);
      critic.backward(reg_cache, (2.0 / n) * (q_next - frozen), &grads);
      adam_step(critic, grads, opt);
    };
    update_one(agent.critic1, agent.critic1_opt, td.frozen_q1);
    update_one(agent.critic2, agent.critic2_opt, td.frozen_q2);
    inner += 1;
    loss = combined_loss();  // threshold check happens after each update
    if (loss < (beta / 100.0) * initial_loss) break;
  }
  m.critic_loss = loss;
  m.critic_inner_updates = inner;

  for (int a = 0; a < cfg.actor_updates; ++a) {
    const auto [actor_loss, entropy] =
        agent.actor_update(buffer, target_entropy, rng);
    m.actor_loss += actor_loss;
    m.entropy = entropy;
  }
  m.actor_loss /= cfg.actor_updates;
  m.alpha = agent.alpha();
  return m;
}

// ------------------------------------------------------------------ k-SAC

KScheduler::KScheduler(KScheduleKind kind, int k_min, int k_max)
    : kind_(kind), k_min_(k_min), k_max_(k_max),
      stats_(k_max - k_min + 1) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("bad k range");
}

int KScheduler::next_k(Rng& rng) {
  const int num_k = k_max_ - k_min_ + 1;
  const int period = period_++;
  const bool incremental =
      kind_ == KScheduleKind::Incremental ||
      (kind_ == KScheduleKind::DelayedSampled && period < num_k);
  if (incremental) return k_min_ + period % num_k;

  // Thompson sampling: draw from each k's Normal posterior, take the argmax.
  // A k with no observations yet is explored first.
  int best_k = k_min_;
  double best_draw = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_k; ++i) {
    const Stats& s = stats_[i];
    double draw;
    if (s.n == 0) {
      draw = std::numeric_limits<double>::infinity();
    } else {
      const double var = s.n > 1 ? s.m2 / (s.n - 1) : 1.0;
      draw = s.mean + std::sqrt(std::max(var, 1e-12)) * rng.normal();
    }
    if (draw > best_draw) {
      best_draw = draw;
      best_k = k_min_ + i;
    }
  }
  return best_k;
}

void KScheduler::record(int k, double eval_return) {
  Stats& s = stats_.at(k - k_min_);
  s.n += 1;
  const double d = eval_return - s.mean;
  s.mean += d / s.n;
  s.m2 += d * (eval_return - s.mean);
}

double KScheduler::mean(int k) const { return stats_.at(k - k_min_).mean; }
long KScheduler::count(int k) const { return stats_.at(k - k_min_).n; }

BaselineConfig rand_sac_make(const EvolutionConfig& ranges, Rng& rng) {
  BaselineConfig cfg;
  cfg.variant = BaselineVariant::RandSac;
  const HyperParams hp = sample_hyperparams(ranges, rng);
  cfg.actor_updates = hp.actor_updates;
  cfg.critic_updates = hp.critic_updates;
  cfg.entropy_scale = hp.entropy_scale;
  cfg.persistence = hp.persistence;
  cfg.gamma = hp.gamma();
  cfg.tau = rng.uniform(0.001, 0.05);
  return cfg;
}

}  // namespace aac
