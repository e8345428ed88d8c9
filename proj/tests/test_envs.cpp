#include <doctest.h>

#include <cmath>

#include "aac/envs.hpp"
#include "aac/persistence.hpp"

using namespace aac;

namespace {

// Deterministic environment with known per-step rewards and an optional
// termination step; lets the wrapper tests control everything.
class ScriptedEnv : public Env {
 public:
  explicit ScriptedEnv(std::vector<double> rewards, int terminate_at = -1,
                       int max_steps = 10)
      : rewards_(std::move(rewards)), terminate_at_(terminate_at) {
    spec_ = EnvSpec{1, 1, max_steps, "scripted"};
  }

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(Rng&) override {
    t_ = 0;
    return Vector::Constant(1, 0.0);
  }
  StepResult step(const Vector&, Rng&) override {
    const double r = t_ < static_cast<int>(rewards_.size()) ? rewards_[t_] : 0.0;
    ++t_;
    return {Vector::Constant(1, static_cast<double>(t_)), r,
            t_ == terminate_at_};
  }

 private:
  EnvSpec spec_;
  std::vector<double> rewards_;
  int terminate_at_;
  int t_ = 0;
};

}  // namespace

TEST_SUITE("envs") {

TEST_CASE("pendulum upright rest point is a zero-reward fixed point") {
  PendulumEnv env;
  env.set_state(0.0, 0.0);
  Rng rng(1);
  const auto r = env.step(Vector::Constant(1, 0.0), rng);
  CHECK(r.reward == 0.0);
  CHECK(env.theta() == 0.0);
  CHECK(env.theta_dot() == 0.0);
}

TEST_CASE("pendulum hanging down with no torque scores -pi^2") {
  PendulumEnv env;
  env.set_state(M_PI, 0.0);
  Rng rng(1);
  const auto r = env.step(Vector::Constant(1, 0.0), rng);
  CHECK(r.reward == doctest::Approx(-M_PI * M_PI).epsilon(1e-9));
  // sin(pi) is ~0, so the bottom is an (unstable) equilibrium.
  CHECK(std::abs(env.theta_dot()) < 1e-12);
}

TEST_CASE("pendulum reset ranges and velocity clamp") {
  PendulumEnv env;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    env.reset(rng);
    CHECK(env.theta() >= -M_PI);
    CHECK(env.theta() <= M_PI);
    CHECK(std::abs(env.theta_dot()) <= 1.0);
  }
  env.set_state(M_PI / 2, 7.9);
  env.step(Vector::Constant(1, 1.0), rng);
  CHECK(env.theta_dot() <= 8.0);
}

TEST_CASE("pointmass dynamics examples") {
  PointMassEnv env;
  Rng rng(1);
  Vector zero2 = Vector::Zero(2);

  env.set_state(zero2, zero2);
  auto r = env.step(zero2, rng);
  CHECK(r.reward == 0.0);

  Vector pos(2);
  pos << 1.0, 0.0;
  env.set_state(pos, zero2);
  r = env.step(zero2, rng);
  CHECK(r.reward == doctest::Approx(-1.0));

  env.set_state(zero2, zero2);
  Vector force(2);
  force << 1.0, 0.0;
  r = env.step(force, rng);
  CHECK(r.obs(2) == doctest::Approx(0.05 * 0.95).epsilon(1e-12));
  CHECK(r.obs(3) == 0.0);
}

TEST_CASE("newsvendor day accounting") {
  double end = -1;
  CHECK(NewsvendorEnv::day_reward(0, 0, 0, &end) == 0.0);
  CHECK(end == 0.0);
  // 10 sold at 2, 20 ordered at 1, 10 carried at 0.05.
  CHECK(NewsvendorEnv::day_reward(0, 20, 10, &end) == doctest::Approx(-0.5));
  CHECK(end == 10.0);
  CHECK(NewsvendorEnv::day_reward(10, 0, 10, &end) == doctest::Approx(20.0));
  CHECK(end == 0.0);
  // Unmet demand penalized at 0.5.
  CHECK(NewsvendorEnv::day_reward(0, 0, 10, &end) == doctest::Approx(-5.0));
}

TEST_CASE("unknown env id rejected") {
  CHECK_THROWS_AS(make_env("cartpole"), std::invalid_argument);
}

TEST_CASE("wrapper k=1 degenerates to the raw environment") {
  PersistenceWrapper wrapped(std::make_unique<ScriptedEnv>(
                                 std::vector<double>{1.0, 2.0, 3.0}),
                             5);
  wrapped.set_persistence(1);
  Rng rng(1);
  const Vector s0 = wrapped.reset(rng);
  CHECK(s0.size() == 2);
  CHECK(s0(1) == 1.0);  // k slot
  const auto step = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK(step.transition.reward_array(0) == 1.0);
  for (int j = 1; j < 5; ++j) CHECK(step.transition.reward_array(j) == 0.0);
  CHECK(step.transition.k == 1);
  CHECK_FALSE(step.transition.done);
}

TEST_CASE("wrapper k=3 collects the inner reward array") {
  PersistenceWrapper wrapped(std::make_unique<ScriptedEnv>(
                                 std::vector<double>{1.0, 0.5, 0.25, 0.1}),
                             5);
  wrapped.set_persistence(3);
  Rng rng(1);
  wrapped.reset(rng);
  const auto step = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK(step.transition.reward_array(0) == 1.0);
  CHECK(step.transition.reward_array(1) == 0.5);
  CHECK(step.transition.reward_array(2) == 0.25);
  CHECK(step.transition.reward_array(3) == 0.0);
  CHECK(step.transition.state(1) == 3.0);
  CHECK(step.transition.next_state(1) == 3.0);
}

TEST_CASE("mid-repeat termination zero-pads and keeps the commanded k") {
  PersistenceWrapper wrapped(std::make_unique<ScriptedEnv>(
                                 std::vector<double>{1.0, 0.5, 0.25},
                                 /*terminate_at=*/1),
                             5);
  wrapped.set_persistence(3);
  Rng rng(1);
  wrapped.reset(rng);
  const auto step = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK(step.transition.done);
  CHECK_FALSE(step.truncated);
  CHECK(step.transition.reward_array(0) == 1.0);
  CHECK(step.transition.reward_array(1) == 0.0);
  CHECK(step.transition.k == 3);
  CHECK_FALSE(wrapped.episode_active());
}

TEST_CASE("time limit truncates without setting done") {
  PersistenceWrapper wrapped(
      std::make_unique<ScriptedEnv>(std::vector<double>{}, -1, /*max_steps=*/7),
      5);
  wrapped.set_persistence(3);  // budget floor(7/3) = 2
  Rng rng(1);
  wrapped.reset(rng);
  auto s1 = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK_FALSE(s1.truncated);
  auto s2 = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK(s2.truncated);
  CHECK_FALSE(s2.transition.done);
  CHECK_FALSE(wrapped.episode_active());
  CHECK_THROWS_AS(wrapped.step(Vector::Constant(1, 0.0), rng),
                  std::logic_error);
}

TEST_CASE("wrapped reward sums match an unwrapped rollout") {
  const std::vector<double> rewards{0.5, 1.5, -2.0, 3.0, 0.25, 1.0, 2.0, -1.0};
  for (int k : {1, 2, 3, 4}) {
    PersistenceWrapper wrapped(
        std::make_unique<ScriptedEnv>(rewards, -1, /*max_steps=*/8), 4);
    wrapped.set_persistence(k);
    Rng rng(1);
    wrapped.reset(rng);
    double wrapped_sum = 0.0;
    int wrapped_steps = 0;
    while (wrapped.episode_active()) {
      const auto s = wrapped.step(Vector::Constant(1, 0.0), rng);
      wrapped_sum += s.transition.reward_array.sum();
      ++wrapped_steps;
    }
    CHECK(wrapped_steps == 8 / k);
    double direct = 0.0;
    for (int i = 0; i < wrapped_steps * k; ++i) direct += rewards[i];
    CHECK(wrapped_sum == doctest::Approx(direct));
  }
}

TEST_CASE("misleading mode reports a fixed k while executing the real one") {
  PersistenceWrapper wrapped(std::make_unique<ScriptedEnv>(
                                 std::vector<double>{1, 1, 1, 1, 1, 1}, -1, 6),
                             5);
  wrapped.set_persistence(3);
  wrapped.set_misleading(true, 1);
  Rng rng(1);
  const Vector s0 = wrapped.reset(rng);
  CHECK(s0(1) == 1.0);
  const auto step = wrapped.step(Vector::Constant(1, 0.0), rng);
  CHECK(step.transition.state(1) == 1.0);
  CHECK(step.transition.next_state(1) == 1.0);
  // The executed persistence is still 3: three inner rewards collected.
  CHECK(step.transition.reward_array.head(3).sum() == doctest::Approx(3.0));
  CHECK(step.transition.k == 3);
}

TEST_CASE("set_persistence validates its range") {
  PersistenceWrapper wrapped(make_env("pendulum"), 5);
  CHECK_THROWS_AS(wrapped.set_persistence(0), std::invalid_argument);
  CHECK_THROWS_AS(wrapped.set_persistence(6), std::invalid_argument);
}

TEST_CASE("fixed seeds give bit-identical trajectories") {
  for (const char* id : {"pendulum", "pointmass", "newsvendor"}) {
    auto run = [&](std::uint64_t seed) {
      PersistenceWrapper w(make_env(id), 3);
      w.set_persistence(2);
      Rng rng(seed);
      Rng act(seed + 1);
      std::vector<double> trace;
      Vector obs = w.reset(rng);
      for (int i = 0; i < 20 && w.episode_active(); ++i) {
        Vector a(w.base_spec().action_dim);
        for (int j = 0; j < a.size(); ++j) a(j) = act.uniform(-1, 1);
        const auto s = w.step(a, rng);
        trace.push_back(s.transition.reward_array.sum());
        for (int j = 0; j < s.transition.next_state.size(); ++j)
          trace.push_back(s.transition.next_state(j));
      }
      return trace;
    };
    const auto t1 = run(9), t2 = run(9);
    REQUIRE(t1.size() == t2.size());
    for (size_t i = 0; i < t1.size(); ++i) CHECK(t1[i] == t2[i]);
  }
}

}  // TEST_SUITE
