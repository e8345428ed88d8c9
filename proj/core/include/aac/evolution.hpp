#pragma once

#include <functional>
#include <optional>

#include "aac/agent.hpp"

namespace aac {

struct ParamRange {
  double min = 0.0;
  double max = 1.0;
  double delta = 0.0;  // perturbation half-width
};

struct EvolutionConfig {
  int population = 20;      // M
  int epochs = 10;          // E
  int steps_per_epoch = 1000;  // T
  ParamRange a_range{1, 10, 2};
  ParamRange c_range{1, 40, 5};
  ParamRange h_range{0.25, 1.75, 0.25};
  ParamRange k_range{1, 15, 2};
  ParamRange g_range{-6.5, -1.0, 0.5};
  double exchange_fraction = 0.20;
  int eval_episodes = 3;
};

struct LineageEntry {
  int epoch;
  int copied_from;
};

struct PopulationMember {
  int id = 0;
  std::unique_ptr<Agent> agent;
  HyperParams hp;
  double fitness = 0.0;
  bool fitness_inherited = false;  // copied from an elite, not yet re-evaluated
  std::vector<LineageEntry> lineage;
};

// Selection and pairing derived from fitness values only; separated from the
// payload copy so it can be checked against a brute-force oracle cheaply.
struct ExchangePlan {
  std::vector<int> elites;  // population indices, post-shuffle pairing order
  std::vector<int> bads;
};

// Sorts by fitness descending (ties broken by lower index ranked higher),
// takes ceil(fraction*M) from each end, and shuffles both groups for random
// pairing: bads[i] receives a copy of elites[i].
ExchangePlan plan_exchange(const std::vector<double>& fitness, double fraction,
                           Rng& rng);

// Uniform draws from the configured ranges (integers inclusive).
HyperParams sample_hyperparams(const EvolutionConfig& cfg, Rng& rng);

// Adds a uniform draw from [-delta, delta] (integer parameters: uniform over
// the integers strictly inside (-delta, delta)) and clamps to [min, max].
HyperParams perturb_hyperparams(const HyperParams& hp,
                                const EvolutionConfig& cfg, Rng& rng);

// Copies networks, optimizer states, log-alpha, hyperparameters, and fitness
// from each paired elite to its bad, then perturbs the bad's hyperparameters.
// Members outside the two groups are untouched.
void apply_exchange(std::vector<PopulationMember>& population,
                    const ExchangePlan& plan, const EvolutionConfig& cfg,
                    int epoch, Rng& rng);

std::vector<PopulationMember> init_population(const EvolutionConfig& cfg,
                                              const AgentConfig& agent_cfg,
                                              Rng& rng);

// Mean undiscounted return of the deterministic policy over `episodes`
// episodes at persistence k, each with step budget floor(max_steps / k).
double evaluate_fitness(const Agent& agent, PersistenceWrapper& wrapper, int k,
                        int episodes, Rng& rng);

struct EpochRecord {
  int epoch;
  int member;
  double fitness;
  HyperParams hp;
  double alpha;
};

struct EvolutionRun {
  std::vector<EpochRecord> history;  // one record per member per epoch
  std::vector<PopulationMember> population;
  long env_steps = 0;
};

struct EvolutionCallbacks {
  // Called after each epoch's evaluation + exchange.
  std::function<void(int epoch, const std::vector<PopulationMember>&)> on_epoch;
};

// Full outer loop: warmup, E epochs of (T collect+train iterations), per-epoch
// evaluation and exchange. threads=1 is the deterministic mode.
EvolutionRun run_evolution(const EvolutionConfig& cfg,
                           const AgentConfig& agent_cfg,
                           const std::string& env_id, int k_max,
                           long warmup_samples, std::uint64_t seed, int threads,
                           const EvolutionCallbacks& callbacks = {});

}  // namespace aac
