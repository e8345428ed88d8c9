#include "aac/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "aac/checkpoint.hpp"
#include "aac/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace aac {

namespace {

KScheduleKind parse_schedule(const std::string& s) {
  if (s == "incremental") return KScheduleKind::Incremental;
  if (s == "sampled") return KScheduleKind::Sampled;
  if (s == "delayed-sampled") return KScheduleKind::DelayedSampled;
  throw std::invalid_argument("unknown k schedule: " + s);
}

std::string schedule_name(KScheduleKind k) {
  switch (k) {
    case KScheduleKind::Incremental: return "incremental";
    case KScheduleKind::Sampled: return "sampled";
    case KScheduleKind::DelayedSampled: return "delayed-sampled";
  }
  return "unknown";
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

ParamRange range_from(const ConfigMap& cfg, const std::string& name,
                      ParamRange def) {
  def.min = cfg.get_double("evolution." + name + "_min", def.min);
  def.max = cfg.get_double("evolution." + name + "_max", def.max);
  def.delta = cfg.get_double("evolution." + name + "_delta", def.delta);
  if (def.min >= def.max) {
    throw std::invalid_argument("evolution." + name + ": min must be < max");
  }
  if (def.delta <= 0.0) {
    throw std::invalid_argument("evolution." + name + ": delta must be > 0");
  }
  return def;
}

}  // namespace

RunConfig RunConfig::from_config(const ConfigMap& cfg) {
  RunConfig rc;
  rc.raw = cfg;
  rc.mode = cfg.get_string("mode", rc.mode);
  rc.env_id = cfg.get_string("env", rc.env_id);
  rc.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 0));
  rc.total_steps = cfg.get_long("steps", rc.total_steps);
  rc.threads = static_cast<int>(cfg.get_long("threads", 1));
  rc.out_dir = cfg.get_string("out", rc.out_dir);
  const int default_kmax = rc.env_id == "newsvendor" ? 5 : 15;
  rc.k_max = static_cast<int>(cfg.get_long("k_max", default_kmax));
  rc.warmup_steps = cfg.get_long("warmup", 0);
  rc.buffer_capacity = cfg.get_long("replay.capacity", rc.buffer_capacity);
  rc.eval_period = cfg.get_long("eval_period", rc.eval_period);
  rc.eval_episodes = static_cast<int>(cfg.get_long("eval_episodes", rc.eval_episodes));

  rc.hidden = parse_int_list(cfg.get_string("agent.hidden", "256,256"));
  rc.actor_lr = cfg.get_double("agent.actor_lr", rc.actor_lr);
  rc.critic_lr = cfg.get_double("agent.critic_lr", rc.critic_lr);
  rc.alpha_lr = cfg.get_double("agent.alpha_lr", rc.alpha_lr);
  rc.init_alpha = cfg.get_double("agent.init_alpha", rc.init_alpha);
  rc.batch_size = static_cast<int>(
      cfg.get_long("agent.batch", cfg.get_long("agent.batch_size", 0)));
  rc.entropy_in_actor_loss =
      cfg.get_bool("agent.entropy_in_actor_loss", rc.entropy_in_actor_loss);

  rc.evo.population = static_cast<int>(cfg.get_long("evolution.population", 20));
  rc.evo.epochs = static_cast<int>(cfg.get_long("evolution.epochs", 10));
  rc.evo.steps_per_epoch =
      static_cast<int>(cfg.get_long("evolution.steps_per_epoch", 1000));
  rc.evo.exchange_fraction =
      cfg.get_double("evolution.exchange_fraction", 0.20);
  rc.evo.eval_episodes =
      static_cast<int>(cfg.get_long("evolution.eval_episodes", 3));
  rc.evo.a_range = range_from(cfg, "a", {1, 10, 2});
  rc.evo.c_range = range_from(cfg, "c", {1, 40, 5});
  rc.evo.h_range = range_from(cfg, "h", {0.25, 1.75, 0.25});
  rc.evo.k_range = range_from(cfg, "k", {1, static_cast<double>(rc.k_max), 2});
  rc.evo.g_range = range_from(cfg, "g", {-6.5, -1.0, 0.5});

  rc.base.tau = cfg.get_double("baseline.tau", 0.005);
  rc.base.target_delay =
      static_cast<int>(cfg.get_long("baseline.target_delay", 2));
  rc.base.gamma = cfg.get_double("baseline.gamma", 0.99);
  rc.base.actor_updates =
      static_cast<int>(cfg.get_long("baseline.actor_updates", 1));
  rc.base.critic_updates =
      static_cast<int>(cfg.get_long("baseline.critic_updates", 1));
  rc.base.entropy_scale = cfg.get_double("baseline.entropy_scale", 1.0);
  rc.base.persistence = static_cast<int>(cfg.get_long("baseline.persistence", 1));
  rc.base.sr_beta_init = cfg.get_double("baseline.sr_beta_init", 70.0);
  rc.base.sr_beta_final = cfg.get_double("baseline.sr_beta_final", 90.0);
  rc.base.sr_max_inner =
      static_cast<int>(cfg.get_long("baseline.sr_max_inner", 64));
  rc.k_schedule = parse_schedule(
      cfg.get_string("baseline.k_schedule", "delayed-sampled"));

  if (rc.mode == "sac") rc.base.variant = BaselineVariant::Sac;
  else if (rc.mode == "sr-sac") rc.base.variant = BaselineVariant::SrSac;
  else if (rc.mode == "k-sac") rc.base.variant = BaselineVariant::KSac;
  else if (rc.mode == "rand-sac") rc.base.variant = BaselineVariant::RandSac;
  else if (rc.mode != "aac") throw std::invalid_argument("unknown mode: " + rc.mode);
  return rc;
}

long RunConfig::resolved_warmup() const {
  if (warmup_steps > 0) return warmup_steps;
  return mode == "aac" ? 10'000 : 1'000;
}

int RunConfig::resolved_batch_size() const {
  if (batch_size > 0) return batch_size;
  return env_id == "newsvendor" ? 128 : 512;
}

AgentConfig RunConfig::agent_config(const EnvSpec& spec) const {
  AgentConfig ac;
  ac.obs_dim = spec.state_dim + 1;
  ac.action_dim = spec.action_dim;
  ac.hidden = hidden;
  ac.actor_lr = actor_lr;
  ac.critic_lr = critic_lr;
  ac.alpha_lr = alpha_lr;
  ac.init_alpha = init_alpha;
  ac.batch_size = resolved_batch_size();
  ac.entropy_in_actor_loss = entropy_in_actor_loss;
  return ac;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) {
    throw std::invalid_argument("discounted_return: gamma must be in [0,1]");
  }
  double g = 1.0, total = 0.0;
  for (double r : rewards) {
    total += g * r;
    g *= gamma;
  }
  return total;
}

Vector ensemble_action(const std::vector<Agent>& actors, const Vector& obs) {
  if (actors.empty()) throw std::invalid_argument("empty ensemble");
  Vector sum = Vector::Zero(actors.front().cfg.action_dim);
  for (const Agent& a : actors) {
    sum += GaussianPolicyHead::from_raw(a.actor.forward(obs)).mode();
  }
  Vector mean = sum / static_cast<double>(actors.size());
  return mean.cwiseMax(-1.0).cwiseMin(1.0);
}

std::vector<SweepRow> eval_frequency_sweep(const std::vector<Agent>& actors,
                                           const std::string& env_id, int k_max,
                                           const std::vector<int>& k_list,
                                           int episodes, bool misleading,
                                           Rng& rng) {
  if (actors.empty()) throw std::invalid_argument("empty ensemble");
  std::vector<SweepRow> rows;
  PersistenceWrapper wrapper(make_env(env_id), k_max);
  wrapper.set_misleading(misleading, 1);
  for (int k : k_list) {
    wrapper.set_persistence(k);
    std::vector<double> returns;
    for (int ep = 0; ep < episodes; ++ep) {
      Vector obs = wrapper.reset(rng);
      double ret = 0.0;
      while (wrapper.episode_active()) {
        const Vector action = ensemble_action(actors, obs);
        PersistentStep step = wrapper.step(action, rng);
        ret += step.transition.reward_array.sum();
        obs = step.transition.next_state;
      }
      returns.push_back(ret);
    }
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= returns.size();
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= returns.size();
    rows.push_back({k, mean, std::sqrt(var)});
  }
  return rows;
}

std::vector<SweepRow> eval_frequency_sweep(const std::vector<Agent>& actors,
                                           const std::string& env_id, int k_max,
                                           const std::vector<int>& k_list,
                                           int episodes, bool misleading,
                                           std::uint64_t seed) {
  Rng rng = Rng(seed).fork(900);
  return eval_frequency_sweep(actors, env_id, k_max, k_list, episodes,
                              misleading, rng);
}

namespace {

void write_config_snapshot(const RunConfig& cfg) {
  std::ofstream out(fs::path(cfg.out_dir) / "config.txt");
  out << "# config hash " << cfg.raw.hash_hex() << "\n" << cfg.raw.canonical();
}

json manifest_base(const RunConfig& cfg) {
  json m;
  m["mode"] = cfg.mode;
  m["env"] = cfg.env_id;
  m["seed"] = cfg.seed;
  m["config_hash"] = cfg.raw.hash_hex();
  m["threads"] = cfg.threads;
  return m;
}

void write_manifest(const RunConfig& cfg, json m) {
  std::ofstream out(fs::path(cfg.out_dir) / "manifest.json");
  out << m.dump(2) << "\n";
}

// Deterministic evaluation return at a fixed persistence.
double eval_return(const Agent& agent, const std::string& env_id, int k_max,
                   int k, int episodes, Rng& rng) {
  PersistenceWrapper wrapper(make_env(env_id), k_max);
  return evaluate_fitness(agent, wrapper, k, episodes, rng);
}

int run_aac(const RunConfig& cfg) {
  const auto env_spec = make_env(cfg.env_id)->spec();
  AgentConfig ac = cfg.agent_config(env_spec);

  CsvWriter pop_csv(
      (fs::path(cfg.out_dir) / "population.csv").string(),
      {"epoch", "member", "fitness", "a", "c", "h", "k", "g", "gamma",
       "target_entropy", "alpha"});

  EvolutionConfig evo = cfg.evo;
  evo.k_range.max = std::min<double>(evo.k_range.max, cfg.k_max);

  EvolutionCallbacks callbacks;
  callbacks.on_epoch = [&](int epoch, const std::vector<PopulationMember>& pop) {
    for (const auto& m : pop) {
      pop_csv.write_row({std::to_string(epoch), std::to_string(m.id),
                         format_double(m.fitness),
                         std::to_string(m.hp.actor_updates),
                         std::to_string(m.hp.critic_updates),
                         format_double(m.hp.entropy_scale),
                         std::to_string(m.hp.persistence),
                         format_double(m.hp.discount_exp),
                         format_double(m.hp.gamma()),
                         format_double(m.hp.target_entropy(env_spec.action_dim)),
                         format_double(m.agent ? m.agent->alpha() : 0.0)});
    }
    pop_csv.flush();
  };

  EvolutionRun run =
      run_evolution(evo, ac, cfg.env_id, cfg.k_max, cfg.resolved_warmup(),
                    cfg.seed, cfg.threads, callbacks);

  const fs::path ckpt_dir = fs::path(cfg.out_dir) / "checkpoints";
  fs::create_directories(ckpt_dir);
  for (const auto& m : run.population) {
    char name[32];
    std::snprintf(name, sizeof name, "member_%03d.ckpt", m.id);
    m.agent->save((ckpt_dir / name).string());
  }

  json manifest = manifest_base(cfg);
  manifest["env_steps"] = run.env_steps;
  manifest["population"] = evo.population;
  manifest["epochs"] = evo.epochs;
  manifest["steps_per_epoch"] = evo.steps_per_epoch;
  manifest["warmup"] = cfg.resolved_warmup();
  double best = -std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (const auto& m : run.population) {
    best = std::max(best, m.fitness);
    mean += m.fitness;
  }
  manifest["final_best_fitness"] = best;
  manifest["final_mean_fitness"] = mean / run.population.size();
  manifest["status"] = "ok";
  write_manifest(cfg, manifest);
  return 0;
}

int run_baseline(const RunConfig& cfg) {
  const auto env_spec = make_env(cfg.env_id)->spec();
  AgentConfig ac = cfg.agent_config(env_spec);

  BaselineConfig base = cfg.base;
  const Rng root(cfg.seed);
  Rng rng = root.fork(10);
  Rng eval_rng = root.fork(11);

  if (base.variant == BaselineVariant::RandSac) {
    EvolutionConfig ranges = cfg.evo;
    ranges.k_range.max = std::min<double>(ranges.k_range.max, cfg.k_max);
    Rng sample_rng = root.fork(12);
    const auto tag = base.variant;
    base = rand_sac_make(ranges, sample_rng);
    base.variant = tag;
  }
  if (base.persistence > cfg.k_max) {
    throw std::invalid_argument("baseline.persistence exceeds k_max");
  }

  Agent agent(ac, rng);
  // Baselines run at a fixed discount and entropy target.
  agent.hp.actor_updates = base.actor_updates;
  agent.hp.critic_updates = base.critic_updates;
  agent.hp.entropy_scale = base.entropy_scale;
  agent.hp.persistence = base.persistence;
  agent.hp.discount_exp = std::log(1.0 - base.gamma);

  TargetNets targets(agent, base.target_delay);
  ReplayBuffer buffer(std::min(cfg.buffer_capacity, cfg.total_steps + 1));
  PersistenceWrapper wrapper(make_env(cfg.env_id), cfg.k_max);

  const bool is_ksac = base.variant == BaselineVariant::KSac;
  KScheduler scheduler(cfg.k_schedule, 1, cfg.k_max);
  int train_k = is_ksac ? scheduler.next_k(rng) : base.persistence;

  CsvWriter metrics_csv(
      (fs::path(cfg.out_dir) / "metrics.csv").string(),
      {"step", "return", "critic_loss", "actor_loss", "alpha", "entropy",
       "critic_inner_updates", "train_k"});
  std::unique_ptr<CsvWriter> k_csv;
  if (is_ksac) {
    k_csv = std::make_unique<CsvWriter>(
        (fs::path(cfg.out_dir) / "k_eval.csv").string(),
        std::vector<std::string>{"period", "k", "mean_return"});
  }

  const long warmup_n = cfg.resolved_warmup();
  const double target_entropy =
      base.entropy_scale * -static_cast<double>(env_spec.action_dim);
  (void)target_entropy;

  wrapper.set_persistence(train_k);
  Vector obs = wrapper.reset(rng);
  BaselineStepMetrics last{};
  double last_return = 0.0;
  int period = 0;

  for (long step = 1; step <= cfg.total_steps; ++step) {
    Vector action(env_spec.action_dim);
    if (step <= warmup_n) {
      for (int d = 0; d < env_spec.action_dim; ++d)
        action(d) = rng.uniform(-1.0, 1.0);
    } else {
      action = agent.act(obs, /*stochastic=*/true, rng);
    }
    PersistentStep ps = wrapper.step(action, rng);
    const bool over = ps.transition.done || ps.truncated;
    obs = ps.transition.next_state;
    buffer.push(std::move(ps.transition));
    if (over) obs = wrapper.reset(rng);

    if (step > warmup_n) {
      const double progress =
          static_cast<double>(step) / static_cast<double>(cfg.total_steps);
      switch (base.variant) {
        case BaselineVariant::SrSac:
          last = sr_sac_train_step(agent, buffer, base, progress, rng);
          break;
        default:
          last = sac_train_step(agent, targets, buffer, base, rng);
          break;
      }
    }

    if (step % cfg.eval_period == 0 || step == cfg.total_steps) {
      if (is_ksac) {
        period += 1;
        double best_mean = -std::numeric_limits<double>::infinity();
        for (int k = 1; k <= cfg.k_max; ++k) {
          const double r = eval_return(agent, cfg.env_id, cfg.k_max, k,
                                       cfg.eval_episodes, eval_rng);
          scheduler.record(k, r);
          best_mean = std::max(best_mean, scheduler.mean(k));
          k_csv->write_row({std::to_string(period), std::to_string(k),
                            format_double(r)});
        }
        last_return = best_mean;  // reported score: max over per-k means
        train_k = scheduler.next_k(rng);
        wrapper.set_persistence(train_k);
        obs = wrapper.reset(rng);
      } else {
        last_return = eval_return(agent, cfg.env_id, cfg.k_max, train_k,
                                  cfg.eval_episodes, eval_rng);
      }
      metrics_csv.write_row(
          {std::to_string(step), format_double(last_return),
           format_double(last.critic_loss), format_double(last.actor_loss),
           format_double(agent.alpha()), format_double(last.entropy),
           std::to_string(last.critic_inner_updates), std::to_string(train_k)});
      metrics_csv.flush();
    }
  }

  const fs::path ckpt_dir = fs::path(cfg.out_dir) / "checkpoints";
  fs::create_directories(ckpt_dir);
  agent.save((ckpt_dir / "agent.ckpt").string());

  json manifest = manifest_base(cfg);
  manifest["variant"] = variant_name(base.variant);
  manifest["env_steps"] = cfg.total_steps;
  manifest["warmup"] = warmup_n;
  manifest["final_return"] = last_return;
  manifest["tau"] = base.tau;
  manifest["gamma"] = base.gamma;
  manifest["actor_updates"] = base.actor_updates;
  manifest["critic_updates"] = base.critic_updates;
  manifest["entropy_scale"] = base.entropy_scale;
  manifest["persistence"] = base.persistence;
  if (is_ksac) manifest["k_schedule"] = schedule_name(cfg.k_schedule);
  manifest["status"] = "ok";
  write_manifest(cfg, manifest);
  return 0;
}

}  // namespace

int run_train(const RunConfig& cfg) {
  make_env(cfg.env_id);  // validate the id before creating artifacts
  fs::create_directories(cfg.out_dir);
  write_config_snapshot(cfg);
  if (cfg.mode == "aac") return run_aac(cfg);
  return run_baseline(cfg);
}

std::vector<Agent> load_population(const std::string& run_dir) {
  const fs::path ckpt_dir = fs::path(run_dir) / "checkpoints";
  if (!fs::is_directory(ckpt_dir)) {
    throw std::invalid_argument("no checkpoints directory in " + run_dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(ckpt_dir)) {
    if (entry.path().extension() == ".ckpt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Agent> agents;
  for (const auto& f : files) agents.push_back(Agent::load(f.string()));
  if (agents.empty()) {
    throw std::invalid_argument("no checkpoints found in " + run_dir);
  }
  return agents;
}

void emit_plot_data(const std::vector<std::string>& run_dirs,
                    const std::string& out_dir) {
  if (run_dirs.empty()) {
    throw std::invalid_argument("emit_plot_data: no run directories given");
  }
  struct ReturnRow {
    std::string env, algo;
    long seed, step;
    double ret;
  };
  struct ParamRow {
    std::string env;
    long seed, epoch;
    std::string param;
    double value;
  };
  std::vector<ReturnRow> returns;
  std::vector<ParamRow> params;

  for (const auto& dir : run_dirs) {
    const fs::path p(dir);
    const fs::path manifest_path = p / "manifest.json";
    if (!fs::exists(manifest_path)) {
      throw std::invalid_argument("missing manifest.json in " + dir);
    }
    json manifest;
    std::ifstream(manifest_path) >> manifest;
    const std::string env = manifest.at("env");
    const long seed = manifest.at("seed");
    const std::string mode = manifest.at("mode");

    if (mode == "aac") {
      const CsvTable pop = CsvTable::read_file((p / "population.csv").string());
      const int c_epoch = pop.column("epoch"), c_fit = pop.column("fitness");
      const long m = manifest.at("population");
      const long t = manifest.at("steps_per_epoch");
      const long warm = manifest.at("warmup");
      // Best member per epoch.
      std::map<long, std::vector<const std::vector<std::string>*>> by_epoch;
      for (const auto& row : pop.rows) {
        by_epoch[std::stol(row[c_epoch])].push_back(&row);
      }
      for (const auto& [epoch, rows] : by_epoch) {
        const std::vector<std::string>* best = rows.front();
        for (const auto* r : rows) {
          if (std::stod((*r)[c_fit]) > std::stod((*best)[c_fit])) best = r;
        }
        returns.push_back({env, "aac", seed, warm + epoch * t * m,
                           std::stod((*best)[c_fit])});
        for (const std::string name : {"a", "c", "h", "k", "g"}) {
          params.push_back({env, seed, epoch, name,
                            std::stod((*best)[pop.column(name)])});
        }
      }
    } else {
      const CsvTable metrics = CsvTable::read_file((p / "metrics.csv").string());
      const int c_step = metrics.column("step"), c_ret = metrics.column("return");
      for (const auto& row : metrics.rows) {
        returns.push_back(
            {env, mode, seed, std::stol(row[c_step]), std::stod(row[c_ret])});
      }
    }
  }

  fs::create_directories(out_dir);
  CsvWriter ret_csv((fs::path(out_dir) / "returns.csv").string(),
                    {"env", "algorithm", "seed", "step", "return"});
  for (const auto& r : returns) {
    ret_csv.write_row({r.env, r.algo, std::to_string(r.seed),
                       std::to_string(r.step), format_double(r.ret)});
  }
  CsvWriter par_csv((fs::path(out_dir) / "hparams.csv").string(),
                    {"env", "seed", "epoch", "param", "value"});
  for (const auto& r : params) {
    par_csv.write_row({r.env, std::to_string(r.seed), std::to_string(r.epoch),
                       r.param, format_double(r.value)});
  }
}

std::string inspect_checkpoint(const std::string& path) {
  const auto [magic, version] = BinaryReader::peek_header(path);
  std::ostringstream out;
  if (magic == "AACA") {
    const Agent agent = Agent::load(path);
    out << "agent checkpoint v" << version << "\n";
    out << "obs_dim " << agent.cfg.obs_dim << ", action_dim "
        << agent.cfg.action_dim << "\n";
    out << "actor layers:";
    for (int s : agent.actor.sizes()) out << " " << s;
    out << "\ncritic layers:";
    for (int s : agent.critic1.sizes()) out << " " << s;
    out << "\nhyperparams: a=" << agent.hp.actor_updates
        << " c=" << agent.hp.critic_updates
        << " h=" << format_double(agent.hp.entropy_scale)
        << " k=" << agent.hp.persistence
        << " g=" << format_double(agent.hp.discount_exp)
        << " (gamma=" << format_double(agent.hp.gamma()) << ")\n";
    out << "alpha " << format_double(agent.alpha()) << ", adam steps "
        << agent.critic1_opt.step << "\n";
  } else if (magic == "AACB") {
    const ReplayBuffer buf = ReplayBuffer::load(path);
    out << "replay snapshot v" << version << "\n";
    out << "capacity " << buf.capacity() << ", stored " << buf.size() << "\n";
  } else {
    throw std::invalid_argument("unrecognized checkpoint magic in " + path);
  }
  return out.str();
}

}  // namespace aac
