#include "aac/persistence.hpp"

namespace aac {

PersistenceWrapper::PersistenceWrapper(std::unique_ptr<Env> env, int k_max)
    : env_(std::move(env)), k_max_(k_max) {
  if (k_max_ < 1) throw std::invalid_argument("k_max must be >= 1");
}

void PersistenceWrapper::set_persistence(int k) {
  if (k < 1 || k > k_max_) {
    throw std::invalid_argument("persistence out of [1, k_max]");
  }
  k_ = k;
  active_ = false;
}

void PersistenceWrapper::set_misleading(bool on, int reported_k) {
  misleading_ = on;
  reported_k_ = reported_k;
}

Vector PersistenceWrapper::observe(const Vector& base_obs) const {
  Vector o(base_obs.size() + 1);
  o << base_obs, static_cast<double>(reported_k());
  return o;
}

Vector PersistenceWrapper::reset(Rng& rng) {
  last_obs_ = observe(env_->reset(rng));
  steps_taken_ = 0;
  active_ = true;
  return last_obs_;
}

PersistentStep PersistenceWrapper::step(const Vector& action, Rng& rng) {
  if (!active_) throw std::logic_error("step on a finished episode");
  PersistentStep out;
  Transition& tr = out.transition;
  tr.state = last_obs_;
  tr.action = action;
  tr.reward_array = Vector::Zero(k_max_);
  tr.k = k_;
  Vector base_obs;
  bool terminal = false;
  for (int j = 0; j < k_; ++j) {
    StepResult r = env_->step(action, rng);
    tr.reward_array(j) = r.reward;
    base_obs = std::move(r.obs);
    if (r.terminal) {  // stop repeating; trailing entries stay zero
      terminal = true;
      break;
    }
  }
  tr.next_state = observe(base_obs);
  tr.done = terminal;
  last_obs_ = tr.next_state;
  steps_taken_ += 1;
  out.truncated = !terminal && steps_taken_ >= step_budget();
  if (terminal || out.truncated) active_ = false;
  return out;
}

}  // namespace aac
