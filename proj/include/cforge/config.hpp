#pragma once

#include <string>

#include "cforge/ddpg.hpp"
#include "cforge/rainbow.hpp"

namespace cforge {

struct RunConfig {
  // search budget
  int episodes = 1100;
  int warmup = 100;
  double validation_fraction = 0.10;
  u64 seed = 1;
  double s_cap = 0.9;
  std::string reward_mode = "terminal_only";  // terminal_only | probe
  double probe_fraction = 0.02;
  int calib_batch = 16;

  // replay and updates
  int replay_capacity = 1000;
  int batch_size = 64;
  double per_alpha = 0.6;
  double per_beta0 = 0.4;

  // reward monitor
  int monitor_window = 20;
  int monitor_consecutive = 5;

  DdpgConfig ddpg;
  RainbowConfig rainbow;

  // genetic baseline
  int ga_population = 20;
  int ga_generations = 55;
  double ga_eta_c = 15.0;
  double ga_eta_m = 20.0;
  double ga_crossover_rate = 0.9;
  double ga_mutation_rate = -1.0;

  int threads = 1;

  // paths
  std::string model_path;
  std::string data_path;
  std::string cost_profile_path;
  std::string rq_table_path;
  std::string lut_csv_path;
  std::string out_dir = "cforge-report";

  void validate() const;
};

/// Flat TOML-style key = value file; '#' comments; dotted keys for the
/// nested agent/GA settings (e.g. ddpg.actor_lr = 1e-3).
RunConfig load_run_config(const std::string& path);
void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& value);

/// CFORGE_SEED environment variable overrides the configured seed.
void apply_env_overrides(RunConfig& cfg);

}  // namespace cforge
