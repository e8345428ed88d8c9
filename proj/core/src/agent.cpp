#include "aac/agent.hpp"

#include <cmath>

#include "aac/checkpoint.hpp"

namespace aac {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467267;
constexpr char kMagic[4] = {'A', 'A', 'C', 'A'};
constexpr std::uint32_t kVersion = 1;

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

Agent::Agent(const AgentConfig& config, Rng& rng)
    : cfg(config),
      actor(with_io(config.obs_dim, config.hidden, 2 * config.action_dim), rng),
      critic1(with_io(config.obs_dim + config.action_dim, config.hidden, 1), rng),
      critic2(with_io(config.obs_dim + config.action_dim, config.hidden, 1), rng),
      actor_opt(AdamState::for_net(actor, config.actor_lr)),
      critic1_opt(AdamState::for_net(critic1, config.critic_lr)),
      critic2_opt(AdamState::for_net(critic2, config.critic_lr)),
      log_alpha(std::log(config.init_alpha)) {
  alpha_opt.lr = config.alpha_lr;
}

Vector Agent::act(const Vector& state, bool stochastic, Rng& rng) const {
  if (state.size() != cfg.obs_dim) {
    throw std::invalid_argument("act: state dimension mismatch");
  }
  const auto head = GaussianPolicyHead::from_raw(actor.forward(state));
  return stochastic ? head.sample(rng).action : head.mode();
}

PolicySample Agent::sample_policy(const Matrix& states, Rng& rng,
                                  NetCache* cache) const {
  const int n = static_cast<int>(states.rows());
  const int adim = cfg.action_dim;
  const Matrix raw = actor.forward(states, cache);
  PolicySample ps;
  ps.mean = raw.leftCols(adim);
  const Matrix raw_ls = raw.rightCols(adim);
  ps.clamp_mask = ((raw_ls.array() >= kLogStdMin) &&
                   (raw_ls.array() <= kLogStdMax))
                      .cast<double>();
  ps.log_std = raw_ls.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  ps.noise.resize(n, adim);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < adim; ++c) ps.noise(r, c) = rng.normal();
  const Matrix std = ps.log_std.array().exp();
  ps.pre_squash = ps.mean + std.cwiseProduct(ps.noise);
  ps.action = ps.pre_squash.array().tanh();
  ps.log_prob.resize(n);
  for (int r = 0; r < n; ++r) {
    double lp = 0.0;
    for (int c = 0; c < adim; ++c) {
      const double z = ps.noise(r, c);
      lp += -0.5 * z * z - ps.log_std(r, c) - kLogSqrt2Pi;
      lp -= log_one_minus_tanh_sq(ps.pre_squash(r, c));
    }
    ps.log_prob(r) = lp;
  }
  return ps;
}

Vector discount_reward_rows(const Matrix& reward_array, double gamma) {
  Vector out = Vector::Zero(reward_array.rows());
  double g = 1.0;
  for (int j = 0; j < reward_array.cols(); ++j) {
    out += g * reward_array.col(j);
    g *= gamma;
  }
  return out;
}

TdTargets Agent::td_targets(const Batch& batch, double gamma, Rng& rng) const {
  if (gamma <= 0.0 || gamma >= 1.0) {
    throw std::invalid_argument("td_targets: gamma must be in (0,1)");
  }
  TdTargets td;
  const PolicySample ps = sample_policy(batch.next_state, rng);
  td.next_actions = ps.action;
  td.next_log_prob = ps.log_prob;
  const Matrix x2 = concat_cols(batch.next_state, ps.action);
  td.frozen_q1 = critic1.forward(x2).col(0);
  td.frozen_q2 = critic2.forward(x2).col(0);
  const Vector q_min = td.frozen_q1.cwiseMin(td.frozen_q2);
  const Vector boot = q_min - alpha() * ps.log_prob;
  td.targets = discount_reward_rows(batch.reward_array, gamma);
  for (int r = 0; r < td.targets.size(); ++r) {
    td.targets(r) += (1.0 - batch.done(r)) *
                     std::pow(gamma, batch.k[r] + 1) * boot(r);
  }
  if (!td.targets.allFinite()) throw NumericError("td_targets: non-finite target");
  return td;
}

double Agent::critic_update(const ReplayBuffer& buffer, double gamma, Rng& rng) {
  const Batch batch = buffer.sample(cfg.batch_size, rng);
  const TdTargets td = td_targets(batch, gamma, rng);
  const double n = static_cast<double>(batch.size());
  const Matrix x = concat_cols(batch.state, batch.action);
  const Matrix x2 = concat_cols(batch.next_state, td.next_actions);

  double total_loss = 0.0;
  auto update_one = [&](DenseNet& critic, AdamState& opt, const Vector& frozen) {
    NetCache td_cache, reg_cache;
    const Vector q = critic.forward(x, &td_cache).col(0);
    const Vector q_next = critic.forward(x2, &reg_cache).col(0);
    const Vector td_err = q - td.targets;
    const Vector reg_err = q_next - frozen;
    total_loss += (td_err.squaredNorm() + reg_err.squaredNorm()) / n;
    NetGrads grads = critic.zero_grads();
    critic.backward(td_cache, (2.0 / n) * td_err, &grads);
    critic.backward(reg_cache, (2.0 / n) * reg_err, &grads);
    adam_step(critic, grads, opt);
  };
  update_one(critic1, critic1_opt, td.frozen_q1);
  update_one(critic2, critic2_opt, td.frozen_q2);
  const double loss = total_loss / 2.0;
  if (!std::isfinite(loss)) throw NumericError("critic_update: non-finite loss");
  return loss;
}

namespace detail {

Matrix actor_output_grad(const PolicySample& ps, const Matrix& dL_daction,
                         double dL_dlogp_weight) {
  const Matrix one_m_t2 =
      (1.0 - ps.action.array().square()).matrix();
  const Matrix sz = ps.log_std.array().exp() * ps.noise.array();
  // d logpi / d mean = 2 tanh(u); d logpi / d log_std = -1 + 2 tanh(u) std z;
  // d action / d mean = 1 - tanh(u)^2; d action / d log_std scales by std z.
  Matrix dmean = dL_daction.cwiseProduct(one_m_t2) +
                 dL_dlogp_weight * 2.0 * ps.action;
  Matrix dlog_std =
      dL_daction.cwiseProduct(one_m_t2).cwiseProduct(sz) +
      dL_dlogp_weight *
          ((2.0 * ps.action.cwiseProduct(sz)).array() - 1.0).matrix();
  dlog_std = dlog_std.cwiseProduct(ps.clamp_mask);
  Matrix out(dmean.rows(), dmean.cols() + dlog_std.cols());
  out << dmean, dlog_std;
  return out;
}

CriticActionGrad min_critic_action_grad(const DenseNet& critic1,
                                        const DenseNet& critic2,
                                        const Matrix& states,
                                        const Matrix& actions) {
  const double n = static_cast<double>(states.rows());
  const int adim = static_cast<int>(actions.cols());
  const Matrix x = concat_cols(states, actions);
  NetCache c1, c2;
  const Vector q1 = critic1.forward(x, &c1).col(0);
  const Vector q2 = critic2.forward(x, &c2).col(0);
  const Vector sel1 = (q1.array() <= q2.array()).cast<double>();
  const Matrix din1 = critic1.backward(c1, (-1.0 / n) * sel1, nullptr);
  const Matrix din2 =
      critic2.backward(c2, (-1.0 / n) * (1.0 - sel1.array()).matrix(), nullptr);
  CriticActionGrad out;
  out.daction = din1.rightCols(adim) + din2.rightCols(adim);
  out.q_min = q1.cwiseMin(q2);
  return out;
}

}  // namespace detail

std::pair<double, double> Agent::actor_update(const ReplayBuffer& buffer,
                                              double target_entropy, Rng& rng) {
  const Batch batch = buffer.sample(cfg.batch_size, rng);
  const double n = static_cast<double>(batch.size());
  NetCache actor_cache;
  const PolicySample ps = sample_policy(batch.state, rng, &actor_cache);
  const auto critic_grad = detail::min_critic_action_grad(
      critic1, critic2, batch.state, ps.action);

  const double a = alpha();
  const double mean_logp = ps.log_prob.mean();
  double loss = -critic_grad.q_min.mean();
  double logp_weight = 0.0;
  if (cfg.entropy_in_actor_loss) {
    loss += a * mean_logp;
    logp_weight = a / n;
  }
  if (!std::isfinite(loss)) throw NumericError("actor_update: non-finite loss");

  const Matrix raw_grad =
      detail::actor_output_grad(ps, critic_grad.daction, logp_weight);
  NetGrads grads = actor.zero_grads();
  actor.backward(actor_cache, raw_grad, &grads);
  adam_step(actor, grads, actor_opt);

  // Temperature step; the policy terms are constants here.
  const double alpha_grad = -(mean_logp + target_entropy);
  log_alpha = adam_step(log_alpha, alpha_grad, alpha_opt);
  return {loss, -mean_logp};
}

StepMetrics Agent::train_step(const ReplayBuffer& buffer, Rng& rng) {
  StepMetrics m;
  m.gamma = hp.gamma();
  m.target_entropy = hp.target_entropy(cfg.action_dim);
  for (int c = 0; c < hp.critic_updates; ++c) {
    m.critic_loss += critic_update(buffer, m.gamma, rng);
    m.critic_update_calls += 1;
  }
  for (int a = 0; a < hp.actor_updates; ++a) {
    const auto [loss, entropy] = actor_update(buffer, m.target_entropy, rng);
    m.actor_loss += loss;
    m.entropy = entropy;
    m.actor_update_calls += 1;
  }
  if (m.critic_update_calls > 0) m.critic_loss /= m.critic_update_calls;
  if (m.actor_update_calls > 0) m.actor_loss /= m.actor_update_calls;
  m.alpha = alpha();
  return m;
}

void Agent::save(const std::string& path) const {
  BinaryWriter w(path, kMagic, kVersion);
  w.write_i64(cfg.obs_dim);
  w.write_i64(cfg.action_dim);
  w.write_i64(static_cast<std::int64_t>(cfg.hidden.size()));
  for (int h : cfg.hidden) w.write_i64(h);
  w.write_f64(cfg.actor_lr);
  w.write_f64(cfg.critic_lr);
  w.write_f64(cfg.alpha_lr);
  w.write_f64(cfg.init_alpha);
  w.write_i64(cfg.batch_size);
  w.write_u32(cfg.entropy_in_actor_loss ? 1 : 0);
  w.write_i64(hp.actor_updates);
  w.write_i64(hp.critic_updates);
  w.write_f64(hp.entropy_scale);
  w.write_i64(hp.persistence);
  w.write_f64(hp.discount_exp);
  write_net(w, actor);
  write_net(w, critic1);
  write_net(w, critic2);
  write_adam(w, actor_opt);
  write_adam(w, critic1_opt);
  write_adam(w, critic2_opt);
  write_scalar_adam(w, alpha_opt);
  w.write_f64(log_alpha);
  if (!w.good()) throw std::runtime_error("failed writing checkpoint " + path);
}

Agent Agent::load(const std::string& path) {
  BinaryReader r(path, kMagic, kVersion);
  AgentConfig cfg;
  cfg.obs_dim = static_cast<int>(r.read_i64());
  cfg.action_dim = static_cast<int>(r.read_i64());
  const auto nh = r.read_i64();
  cfg.hidden.clear();
  for (std::int64_t i = 0; i < nh; ++i)
    cfg.hidden.push_back(static_cast<int>(r.read_i64()));
  cfg.actor_lr = r.read_f64();
  cfg.critic_lr = r.read_f64();
  cfg.alpha_lr = r.read_f64();
  cfg.init_alpha = r.read_f64();
  cfg.batch_size = static_cast<int>(r.read_i64());
  cfg.entropy_in_actor_loss = r.read_u32() != 0;
  Rng scratch(0);
  Agent agent(cfg, scratch);
  agent.hp.actor_updates = static_cast<int>(r.read_i64());
  agent.hp.critic_updates = static_cast<int>(r.read_i64());
  agent.hp.entropy_scale = r.read_f64();
  agent.hp.persistence = static_cast<int>(r.read_i64());
  agent.hp.discount_exp = r.read_f64();
  agent.actor = read_net(r);
  agent.critic1 = read_net(r);
  agent.critic2 = read_net(r);
  agent.actor_opt = read_adam(r);
  agent.critic1_opt = read_adam(r);
  agent.critic2_opt = read_adam(r);
  agent.alpha_opt = read_scalar_adam(r);
  agent.log_alpha = r.read_f64();
  return agent;
}

}  // namespace aac
