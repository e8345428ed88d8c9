// Command-line entry point: train populations or baselines, sweep trained
// policies across control frequencies, emit tidy plot data, and inspect
// checkpoint files.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "aac/csv.hpp"
#include "aac/harness.hpp"

namespace {

// --config file first, then --set key=value overrides, then dedicated flags.
aac::ConfigMap build_config(const std::string& config_path,
                            const std::vector<std::string>& sets) {
  aac::ConfigMap cfg;
  if (!config_path.empty()) cfg = aac::ConfigMap::parse_file(config_path);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got: " + kv);
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-based actor-critic training laboratory"};
  app.require_subcommand(1);

  // ------------------------------------------------------------------ train
  auto* train = app.add_subcommand("train", "Run a training job");
  std::string config_path, mode, env, out;
  std::vector<std::string> sets;
  long seed = -1, steps = -1, threads = -1;
  train->add_option("--config", config_path, "Config file (key = value lines)");
  train->add_option("--set", sets, "Override a config key (key=value)");
  train->add_option("--mode", mode, "aac | sac | sr-sac | k-sac | rand-sac");
  train->add_option("--env", env, "pendulum | pointmass | newsvendor");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--steps", steps, "Total transitions to collect");
  train->add_option("--threads", threads, "Worker threads (1 = deterministic)");
  train->add_option("--out", out, "Output run directory");

  // ------------------------------------------------------------- eval-sweep
  auto* sweep = app.add_subcommand(
      "eval-sweep", "Evaluate a trained run across persistence values");
  std::string sweep_run, sweep_out, k_list_str = "1,2,3,4,5";
  bool misleading = false;
  long sweep_seed = 0, sweep_episodes = 10;
  sweep->add_option("--run", sweep_run, "Run directory with checkpoints")
      ->required();
  sweep->add_option("--k-list", k_list_str, "Comma-separated k values");
  sweep->add_option("--episodes", sweep_episodes, "Episodes per k");
  sweep->add_option("--seed", sweep_seed, "Evaluation seed");
  sweep->add_flag("--misleading", misleading,
                  "Report k=1 in the state while executing the true k");
  sweep->add_option("--out", sweep_out, "Optional CSV output path");

  // ------------------------------------------------------------- emit-plots
  auto* plots = app.add_subcommand("emit-plots", "Write tidy plot CSVs");
  std::vector<std::string> run_dirs;
  std::string plots_out = "plots";
  plots->add_option("--runs", run_dirs, "Run directories")->required();
  plots->add_option("--out", plots_out, "Output directory");

  // ------------------------------------------------- inspect-checkpoint
  auto* inspect = app.add_subcommand("inspect-checkpoint",
                                     "Print a checkpoint summary");
  std::string ckpt_path;
  inspect->add_option("path", ckpt_path, "Checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      aac::ConfigMap cfg = build_config(config_path, sets);
      if (!mode.empty()) cfg.set("mode", mode);
      if (!env.empty()) cfg.set("env", env);
      if (seed >= 0) cfg.set("seed", std::to_string(seed));
      if (steps >= 0) cfg.set("steps", std::to_string(steps));
      if (threads >= 0) cfg.set("threads", std::to_string(threads));
      if (!out.empty()) cfg.set("out", out);
      const aac::RunConfig rc = aac::RunConfig::from_config(cfg);
      return aac::run_train(rc);
    }
    if (*sweep) {
      const auto actors = aac::load_population(sweep_run);
      std::vector<int> ks;
      {
        std::stringstream ss(k_list_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) ks.push_back(std::stoi(tok));
      }
      int k_max = 1;
      for (int k : ks) k_max = std::max(k_max, k);
      // Figure out the env from the run manifest via emit-time conventions.
      aac::ConfigMap cfg = aac::ConfigMap::parse_file(sweep_run + "/config.txt");
      const std::string env_id = cfg.get_string("env", "pendulum");
      const int trained_k_max =
          static_cast<int>(cfg.get_long("k_max", env_id == "newsvendor" ? 5 : 15));
      k_max = std::max(k_max, trained_k_max);
      const auto rows = aac::eval_frequency_sweep(
          actors, env_id, k_max, ks, static_cast<int>(sweep_episodes),
          misleading, static_cast<std::uint64_t>(sweep_seed));
      std::cout << "k,mean_return,std\n";
      for (const auto& r : rows) {
        std::cout << r.k << "," << aac::format_double(r.mean_return) << ","
                  << aac::format_double(r.std_return) << "\n";
      }
      if (!sweep_out.empty()) {
        aac::CsvWriter csv(sweep_out, {"k", "mean_return", "std"});
        for (const auto& r : rows) {
          csv.write_row({std::to_string(r.k), aac::format_double(r.mean_return),
                         aac::format_double(r.std_return)});
        }
      }
      return 0;
    }
    if (*plots) {
      aac::emit_plot_data(run_dirs, plots_out);
      return 0;
    }
    if (*inspect) {
      std::cout << aac::inspect_checkpoint(ckpt_path);
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
