#include "cforge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cforge/io.hpp"

namespace cforge {

void RunConfig::validate() const {
  require(episodes >= 1, "config: episodes must be >= 1");
  require(warmup >= 0 && warmup < episodes, "config: warmup must be < episodes");
  require(validation_fraction > 0.0 && validation_fraction <= 1.0,
          "config: validation_fraction out of (0,1]");
  require(s_cap > 0.0 && s_cap <= 1.0, "config: s_cap out of (0,1]");
  require(reward_mode == "terminal_only" || reward_mode == "probe",
          "config: unknown reward_mode");
  require(batch_size >= 1 && replay_capacity >= batch_size, "config: bad replay sizing");
  require(calib_batch >= 1, "config: calib_batch must be >= 1");
  require(threads >= 1, "config: threads must be >= 1");
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

double num(const std::string& v) { return std::stod(v); }

}  // namespace

void apply_config_line(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = unquote(trim(raw));
  if (key == "episodes") cfg.episodes = static_cast<int>(num(value));
  else if (key == "warmup") cfg.warmup = static_cast<int>(num(value));
  else if (key == "validation_fraction") cfg.validation_fraction = num(value);
  else if (key == "seed") cfg.seed = static_cast<u64>(std::stoull(value));
  else if (key == "s_cap") cfg.s_cap = num(value);
  else if (key == "reward_mode") cfg.reward_mode = value;
  else if (key == "probe_fraction") cfg.probe_fraction = num(value);
  else if (key == "calib_batch") cfg.calib_batch = static_cast<int>(num(value));
  else if (key == "replay_capacity") cfg.replay_capacity = static_cast<int>(num(value));
  else if (key == "batch_size") cfg.batch_size = static_cast<int>(num(value));
  else if (key == "per_alpha") cfg.per_alpha = num(value);
  else if (key == "per_beta0") cfg.per_beta0 = num(value);
  else if (key == "monitor_window") cfg.monitor_window = static_cast<int>(num(value));
  else if (key == "monitor_consecutive") cfg.monitor_consecutive = static_cast<int>(num(value));
  else if (key == "threads") cfg.threads = static_cast<int>(num(value));
  else if (key == "ddpg.hidden") cfg.ddpg.hidden = static_cast<int>(num(value));
  else if (key == "ddpg.actor_lr") cfg.ddpg.actor_lr = num(value);
  else if (key == "ddpg.critic_lr") cfg.ddpg.critic_lr = num(value);
  else if (key == "ddpg.tau") cfg.ddpg.tau = num(value);
  else if (key == "ddpg.gamma") cfg.ddpg.gamma = num(value);
  else if (key == "ddpg.sigma_init") cfg.ddpg.sigma_init = num(value);
  else if (key == "ddpg.sigma_decay") cfg.ddpg.sigma_decay = num(value);
  else if (key == "rainbow.hidden") cfg.rainbow.hidden = static_cast<int>(num(value));
  else if (key == "rainbow.atoms") cfg.rainbow.atoms = static_cast<int>(num(value));
  else if (key == "rainbow.lr") cfg.rainbow.lr = num(value);
  else if (key == "rainbow.n_step") cfg.rainbow.n_step = static_cast<int>(num(value));
  else if (key == "rainbow.target_update_period")
    cfg.rainbow.target_update_period = static_cast<int>(num(value));
  else if (key == "ga.population") cfg.ga_population = static_cast<int>(num(value));
  else if (key == "ga.generations") cfg.ga_generations = static_cast<int>(num(value));
  else if (key == "ga.eta_c") cfg.ga_eta_c = num(value);
  else if (key == "ga.eta_m") cfg.ga_eta_m = num(value);
  else if (key == "ga.crossover_rate") cfg.ga_crossover_rate = num(value);
  else if (key == "ga.mutation_rate") cfg.ga_mutation_rate = num(value);
  else if (key == "model") cfg.model_path = value;
  else if (key == "data") cfg.data_path = value;
  else if (key == "cost_profile") cfg.cost_profile_path = value;
  else if (key == "rq_table") cfg.rq_table_path = value;
  else if (key == "reward_lut") cfg.lut_csv_path = value;
  else if (key == "out") cfg.out_dir = value;
  else throw std::runtime_error("config: unknown key '" + key + "'");
}

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  auto raw = read_file(path);
  std::istringstream in(std::string(raw.begin(), raw.end()));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos,
            "config: expected key = value at line " + std::to_string(lineno));
    try {
      apply_config_line(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
  return cfg;
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* s = std::getenv("CFORGE_SEED")) cfg.seed = std::strtoull(s, nullptr, 10);
}

}  // namespace cforge
