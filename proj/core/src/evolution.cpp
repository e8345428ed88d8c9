#include "aac/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace aac {

namespace {

int group_size(int population, double fraction) {
  return static_cast<int>(std::ceil(population * fraction));
}

double clamp(double v, const ParamRange& r) {
  return std::clamp(v, r.min, r.max);
}

int perturb_int(int value, const ParamRange& r, Rng& rng) {
  const int delta = static_cast<int>(r.delta);
  int v = value;
  if (delta >= 1) {
    // Uniform over the integers strictly inside (-delta, delta).
    v += static_cast<int>(rng.uniform_int(-(delta - 1), delta - 1));
  }
  return static_cast<int>(clamp(v, r));
}

double perturb_real(double value, const ParamRange& r, Rng& rng) {
  return clamp(value + rng.uniform(-r.delta, r.delta), r);
}

}  // namespace

ExchangePlan plan_exchange(const std::vector<double>& fitness, double fraction,
                           Rng& rng) {
  const int m = static_cast<int>(fitness.size());
  if (m < 2) throw std::invalid_argument("population must have >= 2 members");
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (fitness[a] != fitness[b]) return fitness[a] > fitness[b];
    return a < b;  // ties: lower id ranks higher
  });
  const int g = group_size(m, fraction);
  ExchangePlan plan;
  plan.elites.assign(order.begin(), order.begin() + g);
  plan.bads.assign(order.end() - g, order.end());
  rng.shuffle(plan.elites);
  rng.shuffle(plan.bads);
  return plan;
}

HyperParams sample_hyperparams(const EvolutionConfig& cfg, Rng& rng) {
  HyperParams hp;
  hp.actor_updates = static_cast<int>(
      rng.uniform_int(static_cast<long>(cfg.a_range.min),
                      static_cast<long>(cfg.a_range.max)));
  hp.critic_updates = static_cast<int>(
      rng.uniform_int(static_cast<long>(cfg.c_range.min),
                      static_cast<long>(cfg.c_range.max)));
  hp.entropy_scale = rng.uniform(cfg.h_range.min, cfg.h_range.max);
  hp.persistence = static_cast<int>(
      rng.uniform_int(static_cast<long>(cfg.k_range.min),
                      static_cast<long>(cfg.k_range.max)));
  hp.discount_exp = rng.uniform(cfg.g_range.min, cfg.g_range.max);
  return hp;
}

HyperParams perturb_hyperparams(const HyperParams& hp,
                                const EvolutionConfig& cfg, Rng& rng) {
  HyperParams out = hp;
  out.actor_updates = perturb_int(hp.actor_updates, cfg.a_range, rng);
  out.critic_updates = perturb_int(hp.critic_updates, cfg.c_range, rng);
  out.entropy_scale = perturb_real(hp.entropy_scale, cfg.h_range, rng);
  out.persistence = perturb_int(hp.persistence, cfg.k_range, rng);
  out.discount_exp = perturb_real(hp.discount_exp, cfg.g_range, rng);
  return out;
}

void apply_exchange(std::vector<PopulationMember>& population,
                    const ExchangePlan& plan, const EvolutionConfig& cfg,
                    int epoch, Rng& rng) {
  for (std::size_t i = 0; i < plan.bads.size(); ++i) {
    PopulationMember& bad = population[plan.bads[i]];
    const PopulationMember& elite = population[plan.elites[i]];
    if (bad.agent && elite.agent) {
      *bad.agent = *elite.agent;  // networks, Adam states, log-alpha
    }
    bad.hp = perturb_hyperparams(elite.hp, cfg, rng);
    if (bad.agent) bad.agent->hp = bad.hp;
    bad.fitness = elite.fitness;
    bad.fitness_inherited = true;
    bad.lineage.push_back({epoch, elite.id});
  }
}

std::vector<PopulationMember> init_population(const EvolutionConfig& cfg,
                                              const AgentConfig& agent_cfg,
                                              Rng& rng) {
  if (cfg.population < 2) throw std::invalid_argument("population must be >= 2");
  std::vector<PopulationMember> pop;
  pop.reserve(cfg.population);
  for (int i = 0; i < cfg.population; ++i) {
    PopulationMember m;
    m.id = i;
    m.hp = sample_hyperparams(cfg, rng);
    m.agent = std::make_unique<Agent>(agent_cfg, rng);
    m.agent->hp = m.hp;
    pop.push_back(std::move(m));
  }
  return pop;
}

double evaluate_fitness(const Agent& agent, PersistenceWrapper& wrapper, int k,
                        int episodes, Rng& rng) {
  wrapper.set_persistence(k);
  double total = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Vector obs = wrapper.reset(rng);
    double ret = 0.0;
    while (wrapper.episode_active()) {
      const Vector action = agent.act(obs, /*stochastic=*/false, rng);
      PersistentStep step = wrapper.step(action, rng);
      ret += step.transition.reward_array.sum();
      obs = step.transition.next_state;
    }
    total += ret;
  }
  const double fitness = total / episodes;
  if (!std::isfinite(fitness)) throw NumericError("non-finite fitness");
  return fitness;
}

namespace {

// Per-member runtime state for the training loop.
struct MemberRuntime {
  std::unique_ptr<PersistenceWrapper> wrapper;
  Rng rng{0};
  Vector obs;

  void start_episode(int k) {
    wrapper->set_persistence(k);
    obs = wrapper->reset(rng);
  }
};

// Runs fn(i) for every member, split across `threads` workers. The first
// exception wins and is rethrown on the caller thread.
void parallel_members(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::mutex err_mu;
  std::exception_ptr first_error;
  for (int t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += threads) fn(i);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

EvolutionRun run_evolution(const EvolutionConfig& cfg,
                           const AgentConfig& agent_cfg,
                           const std::string& env_id, int k_max,
                           long warmup_samples, std::uint64_t seed, int threads,
                           const EvolutionCallbacks& callbacks) {
  const Rng base(seed);
  Rng evo_rng = base.fork(0);

  EvolutionRun run;
  run.population = init_population(cfg, agent_cfg, evo_rng);

  const long capacity = std::max<long>(
      1, warmup_samples +
             static_cast<long>(cfg.epochs) * cfg.steps_per_epoch * cfg.population);
  ReplayBuffer buffer(capacity);

  {
    PersistenceWrapper warmup_wrapper(make_env(env_id), k_max);
    Rng warmup_rng = base.fork(1);
    warmup(buffer, warmup_wrapper, 1, k_max, warmup_samples, warmup_rng);
    run.env_steps += buffer.size();
  }

  std::vector<MemberRuntime> runtime(cfg.population);
  for (int i = 0; i < cfg.population; ++i) {
    runtime[i].wrapper =
        std::make_unique<PersistenceWrapper>(make_env(env_id), k_max);
    runtime[i].rng = base.fork(2 + i);
    runtime[i].start_episode(run.population[i].hp.persistence);
  }

  auto record_epoch = [&](int epoch) {
    for (const auto& m : run.population) {
      run.history.push_back(
          {epoch, m.id, m.fitness, m.hp, m.agent ? m.agent->alpha() : 0.0});
    }
  };

  auto evaluate_all = [&] {
    parallel_members(cfg.population, threads, [&](int i) {
      PopulationMember& m = run.population[i];
      m.fitness = evaluate_fitness(*m.agent, *runtime[i].wrapper,
                                   m.hp.persistence, cfg.eval_episodes,
                                   runtime[i].rng);
      m.fitness_inherited = false;
    });
  };

  if (cfg.epochs == 0) {
    evaluate_all();
    record_epoch(0);
    if (callbacks.on_epoch) callbacks.on_epoch(0, run.population);
    return run;
  }

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int t = 0; t < cfg.steps_per_epoch; ++t) {
      // Collection phase: one wrapped step per member.
      parallel_members(cfg.population, threads, [&](int i) {
        MemberRuntime& rt = runtime[i];
        const Vector action = run.population[i].agent->act(
            rt.obs, /*stochastic=*/true, rt.rng);
        PersistentStep step = rt.wrapper->step(action, rt.rng);
        const bool over = step.transition.done || step.truncated;
        rt.obs = step.transition.next_state;
        buffer.push(std::move(step.transition));
        if (over) rt.start_episode(run.population[i].hp.persistence);
      });
      run.env_steps += cfg.population;
      // Training phase.
      parallel_members(cfg.population, threads, [&](int i) {
        run.population[i].agent->hp = run.population[i].hp;
        run.population[i].agent->train_step(buffer, runtime[i].rng);
      });
    }

    evaluate_all();
    record_epoch(epoch);

    std::vector<double> fitness(cfg.population);
    for (int i = 0; i < cfg.population; ++i) fitness[i] = run.population[i].fitness;
    const ExchangePlan plan =
        plan_exchange(fitness, cfg.exchange_fraction, evo_rng);
    apply_exchange(run.population, plan, cfg, epoch, evo_rng);

    // Evaluation and exchange interrupt collection; restart every episode at
    // the (possibly new) persistence.
    for (int i = 0; i < cfg.population; ++i) {
      runtime[i].start_episode(run.population[i].hp.persistence);
    }
    if (callbacks.on_epoch) callbacks.on_epoch(epoch, run.population);
  }
  return run;
}

}  // namespace aac
