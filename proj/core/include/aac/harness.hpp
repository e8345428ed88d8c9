#pragma once

#include "aac/baselines.hpp"
#include "aac/config.hpp"

namespace aac {

// Fully resolved settings for one run; every field has a config key.
struct RunConfig {
  std::string mode = "aac";  // aac | sac | sr-sac | k-sac | rand-sac
  std::string env_id = "pendulum";
  std::uint64_t seed = 0;
  long total_steps = 50'000;  // transitions collected, warmup included
  int threads = 1;            // 1 engages deterministic mode
  std::string out_dir = "run";
  int k_max = 15;
  long warmup_steps = 0;  // 0 = mode default (10,000 aac / 1,000 baselines)
  long buffer_capacity = 2'000'000;
  long eval_period = 1'000;
  int eval_episodes = 10;

  std::vector<int> hidden = {256, 256};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double alpha_lr = 1e-4;
  double init_alpha = 0.1;
  int batch_size = 0;  // 0 = env default (128 newsvendor, 512 otherwise)
  bool entropy_in_actor_loss = true;

  EvolutionConfig evo;
  BaselineConfig base;
  KScheduleKind k_schedule = KScheduleKind::DelayedSampled;

  ConfigMap raw;  // snapshot used for the config hash

  static RunConfig from_config(const ConfigMap& cfg);
  long resolved_warmup() const;
  int resolved_batch_size() const;
  AgentConfig agent_config(const EnvSpec& spec) const;
};

// Executes a full training run and writes the run directory
// (config snapshot, metrics/population CSVs, checkpoints, manifest).
// Returns the process exit code (0 on success).
int run_train(const RunConfig& cfg);

// Mean of the members' deterministic actions, re-clamped to [-1,1].
Vector ensemble_action(const std::vector<Agent>& actors, const Vector& obs);

struct SweepRow {
  int k;
  double mean_return;
  double std_return;
};

// Deterministic-policy returns across control frequencies. In misleading
// mode the observation's k slot reports 1 while the wrapper executes the
// true k. The step budget per episode is floor(max_steps / k).
std::vector<SweepRow> eval_frequency_sweep(const std::vector<Agent>& actors,
                                           const std::string& env_id, int k_max,
                                           const std::vector<int>& k_list,
                                           int episodes, bool misleading,
                                           Rng& rng);
std::vector<SweepRow> eval_frequency_sweep(const std::vector<Agent>& actors,
                                           const std::string& env_id, int k_max,
                                           const std::vector<int>& k_list,
                                           int episodes, bool misleading,
                                           std::uint64_t seed);

// Long-format CSVs across runs: returns.csv (env, algorithm, seed, step,
// return) and hparams.csv (env, seed, epoch, param, value; best member per
// epoch). Throws std::invalid_argument on an empty list or a bad run dir.
void emit_plot_data(const std::vector<std::string>& run_dirs,
                    const std::string& out_dir);

// Human-readable checkpoint summary.
std::string inspect_checkpoint(const std::string& path);

// Loads every checkpoints/member_*.ckpt (or the single agent.ckpt).
std::vector<Agent> load_population(const std::string& run_dir);

// G = sum_i gamma^i r_i.
double discounted_return(const std::vector<double>& rewards, double gamma);

}  // namespace aac
