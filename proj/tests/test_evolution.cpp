#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aac/evolution.hpp"

using namespace aac;

namespace {

// Re-derives the exchange plan with an independent (and deliberately naive)
// implementation, mirroring the shared rng consumption order.
ExchangePlan oracle_plan(const std::vector<double>& fitness, double fraction,
                         Rng& rng) {
  const int m = static_cast<int>(fitness.size());
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (fitness[i] != fitness[j]) return fitness[i] > fitness[j];
    return i < j;
  });
  const int g = static_cast<int>(std::ceil(fraction * m));
  ExchangePlan plan;
  plan.elites.assign(order.begin(), order.begin() + g);
  plan.bads.assign(order.end() - g, order.end());
  rng.shuffle(plan.elites);
  rng.shuffle(plan.bads);
  return plan;
}

EvolutionConfig default_ranges() { return EvolutionConfig{}; }

bool in_range(double v, const ParamRange& r) { return v >= r.min && v <= r.max; }

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("worked selection example for M=5") {
  // fitness [3,1,5,2,4]: ceil(0.2*5)=1; best is index 2, worst index 1.
  Rng rng(1);
  const ExchangePlan plan = plan_exchange({3, 1, 5, 2, 4}, 0.2, rng);
  REQUIRE(plan.elites.size() == 1);
  REQUIRE(plan.bads.size() == 1);
  CHECK(plan.elites[0] == 2);
  CHECK(plan.bads[0] == 1);
}

TEST_CASE("group size rounds up and groups never overlap") {
  Rng rng(2);
  for (int m : {2, 3, 4, 5, 6, 10, 11}) {
    std::vector<double> fitness(m);
    for (int i = 0; i < m; ++i) fitness[i] = rng.uniform(-10, 10);
    const ExchangePlan plan = plan_exchange(fitness, 0.2, rng);
    const int g = static_cast<int>(std::ceil(0.2 * m));
    CHECK(static_cast<int>(plan.elites.size()) == g);
    CHECK(static_cast<int>(plan.bads.size()) == g);
    for (int e : plan.elites)
      CHECK(std::find(plan.bads.begin(), plan.bads.end(), e) == plan.bads.end());
  }
}

TEST_CASE("all-tied fitness resolves by index") {
  Rng rng(3);
  const ExchangePlan plan = plan_exchange({1, 1, 1, 1, 1}, 0.2, rng);
  CHECK(plan.elites[0] == 0);  // earliest index ranks highest
  CHECK(plan.bads[0] == 4);
}

TEST_CASE("plan matches the brute-force oracle on random instances") {
  Rng meta(4);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = static_cast<int>(meta.uniform_int(2, 50));
    std::vector<double> fitness(m);
    for (int i = 0; i < m; ++i) {
      fitness[i] = meta.uniform(-100, 100);
      if (meta.uniform(0, 1) < 0.2 && i > 0) fitness[i] = fitness[i - 1];
    }
    const std::uint64_t seed = meta.uniform_int(0, 1 << 30);
    Rng r1(seed), r2(seed);
    const ExchangePlan got = plan_exchange(fitness, 0.2, r1);
    const ExchangePlan want = oracle_plan(fitness, 0.2, r2);
    CHECK(got.elites == want.elites);
    CHECK(got.bads == want.bads);
  }
}

TEST_CASE("selection is invariant to affine fitness rescaling") {
  Rng meta(5);
  std::vector<double> fitness(9);
  for (auto& f : fitness) f = meta.uniform(-5, 5);
  std::vector<double> scaled(9);
  for (int i = 0; i < 9; ++i) scaled[i] = 3.0 * fitness[i] + 42.0;
  Rng r1(7), r2(7);
  const ExchangePlan a = plan_exchange(fitness, 0.2, r1);
  const ExchangePlan b = plan_exchange(scaled, 0.2, r2);
  CHECK(a.elites == b.elites);
  CHECK(a.bads == b.bads);
}

TEST_CASE("sampled hyperparameters respect the search ranges") {
  const EvolutionConfig cfg = default_ranges();
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const HyperParams hp = sample_hyperparams(cfg, rng);
    CHECK(in_range(hp.actor_updates, cfg.a_range));
    CHECK(in_range(hp.critic_updates, cfg.c_range));
    CHECK(in_range(hp.entropy_scale, cfg.h_range));
    CHECK(in_range(hp.persistence, cfg.k_range));
    CHECK(in_range(hp.discount_exp, cfg.g_range));
    CHECK(hp.actor_updates == static_cast<int>(hp.actor_updates));
  }
}

TEST_CASE("sampled h is uniform over its range (coarse KS test)") {
  const EvolutionConfig cfg = default_ranges();
  Rng rng(7);
  const int n = 5000;
  std::vector<double> hs(n);
  for (auto& h : hs) h = sample_hyperparams(cfg, rng).entropy_scale;
  std::sort(hs.begin(), hs.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = (hs[i] - cfg.h_range.min) / (cfg.h_range.max - cfg.h_range.min);
    ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
  }
  CHECK(ks < 1.95 / std::sqrt(n));  // ~p=0.001 critical value
}

TEST_CASE("perturbation stays within delta and clamps at the boundary") {
  const EvolutionConfig cfg = default_ranges();
  Rng rng(8);
  HyperParams hp;
  hp.actor_updates = 5;
  hp.critic_updates = 20;
  hp.entropy_scale = 1.75;  // at the max
  hp.persistence = 8;
  hp.discount_exp = -3.0;
  for (int i = 0; i < 2000; ++i) {
    const HyperParams p = perturb_hyperparams(hp, cfg, rng);
    CHECK(std::abs(p.actor_updates - 5) < cfg.a_range.delta);
    CHECK(std::abs(p.critic_updates - 20) < cfg.c_range.delta);
    CHECK(std::abs(p.persistence - 8) < cfg.k_range.delta);
    CHECK(std::abs(p.discount_exp + 3.0) <= cfg.g_range.delta);
    CHECK(p.entropy_scale <= 1.75);
    CHECK(p.entropy_scale >= 1.75 - cfg.h_range.delta);
    CHECK(in_range(p.actor_updates, cfg.a_range));
    CHECK(in_range(p.persistence, cfg.k_range));
  }
}

TEST_CASE("perturbation clamps integers at the range edges") {
  const EvolutionConfig cfg = default_ranges();
  Rng rng(9);
  HyperParams hp;
  hp.actor_updates = 1;
  hp.critic_updates = 1;
  hp.persistence = 15;
  for (int i = 0; i < 500; ++i) {
    const HyperParams p = perturb_hyperparams(hp, cfg, rng);
    CHECK(p.actor_updates >= 1);
    CHECK(p.persistence <= 15);
  }
}

TEST_CASE("exchange copies payload to bads and leaves the middle untouched") {
  const EvolutionConfig cfg = [] {
    EvolutionConfig c;
    c.population = 5;
    return c;
  }();
  AgentConfig agent_cfg;
  agent_cfg.obs_dim = 3;
  agent_cfg.action_dim = 1;
  agent_cfg.hidden = {8};
  agent_cfg.batch_size = 4;
  Rng rng(10);
  auto pop = init_population(cfg, agent_cfg, rng);
  REQUIRE(pop.size() == 5);
  const std::vector<double> fitness = {3, 1, 5, 2, 4};
  for (int i = 0; i < 5; ++i) pop[i].fitness = fitness[i];

  // Record the middle members' parameters and hyperparameters.
  const double w0 = pop[0].agent->actor.weights()[0].sum();
  const double w3 = pop[3].agent->actor.weights()[0].sum();
  const double w4 = pop[4].agent->actor.weights()[0].sum();
  const HyperParams hp0 = pop[0].hp;

  const ExchangePlan plan = plan_exchange(fitness, cfg.exchange_fraction, rng);
  apply_exchange(pop, plan, cfg, /*epoch=*/1, rng);

  // Member 1 (worst) received member 2's networks, log-alpha and fitness.
  CHECK((pop[1].agent->actor.weights()[0].array() ==
         pop[2].agent->actor.weights()[0].array())
            .all());
  CHECK(pop[1].agent->log_alpha == pop[2].agent->log_alpha);
  CHECK(pop[1].fitness == 5);
  CHECK(pop[1].fitness_inherited);
  REQUIRE(!pop[1].lineage.empty());
  CHECK(pop[1].lineage.back().copied_from == 2);
  CHECK(pop[1].lineage.back().epoch == 1);
  // Hyperparameters were perturbed around the elite's values.
  CHECK(std::abs(pop[1].hp.entropy_scale - pop[2].hp.entropy_scale) <=
        cfg.h_range.delta);

  CHECK(pop[0].agent->actor.weights()[0].sum() == w0);
  CHECK(pop[3].agent->actor.weights()[0].sum() == w3);
  CHECK(pop[4].agent->actor.weights()[0].sum() == w4);
  CHECK(pop[0].hp.entropy_scale == hp0.entropy_scale);
}

TEST_CASE("M=2 exchanges the single worst for the single best") {
  Rng rng(11);
  const ExchangePlan plan = plan_exchange({1.0, 2.0}, 0.2, rng);
  REQUIRE(plan.elites.size() == 1);
  CHECK(plan.elites[0] == 1);
  CHECK(plan.bads[0] == 0);
}

TEST_CASE("selection pressure moves a mock population toward the optimum") {
  // Fitness is a deterministic function of h alone; over epochs the best h
  // should drift toward the peak at 1.0 (sign test over repetitions).
  const EvolutionConfig cfg = [] {
    EvolutionConfig c;
    c.population = 8;
    return c;
  }();
  Rng meta(12);
  int improved = 0, repeats = 20;
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng = meta.fork(rep);
    std::vector<HyperParams> hps(cfg.population);
    for (auto& hp : hps) hp = sample_hyperparams(cfg, rng);
    auto best_dist = [&] {
      double d = 1e9;
      for (auto& hp : hps) d = std::min(d, std::abs(hp.entropy_scale - 1.0));
      return d;
    };
    const double before = best_dist();
    for (int epoch = 0; epoch < 50; ++epoch) {
      std::vector<double> fitness(cfg.population);
      for (int i = 0; i < cfg.population; ++i)
        fitness[i] = -std::abs(hps[i].entropy_scale - 1.0);
      const ExchangePlan plan =
          plan_exchange(fitness, cfg.exchange_fraction, rng);
      for (size_t i = 0; i < plan.bads.size(); ++i)
        hps[plan.bads[i]] = perturb_hyperparams(hps[plan.elites[i]], cfg, rng);
    }
    if (best_dist() <= before) ++improved;
  }
  CHECK(improved >= 15);  // sign test, p << 0.01 under a fair coin
}

TEST_CASE("fitness evaluation is deterministic and episode-averaged") {
  AgentConfig cfg;
  cfg.obs_dim = 4;
  cfg.action_dim = 1;
  cfg.hidden = {8};
  cfg.batch_size = 4;
  Rng rng(13);
  Agent agent(cfg, rng);
  PersistenceWrapper w1(make_env("pendulum"), 3), w2(make_env("pendulum"), 3);
  Rng e1(5), e2(5);
  const double f1 = evaluate_fitness(agent, w1, 2, 3, e1);
  const double f2 = evaluate_fitness(agent, w2, 2, 3, e2);
  CHECK(f1 == f2);
  CHECK(std::isfinite(f1));
  CHECK(f1 < 0.0);  // pendulum rewards are non-positive
}

}  // TEST_SUITE
