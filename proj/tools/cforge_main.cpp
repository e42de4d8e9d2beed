#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "cforge/config.hpp"
#include "cforge/io.hpp"
#include "cforge/search.hpp"

namespace fs = std::filesystem;
using namespace cforge;

namespace {

struct CommonArgs {
  std::string model, data, config, out, cost_profile, rq_table, reward_lut;
  u64 seed = 0;
  bool seed_set = false;
  int episodes = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_data) {
  cmd->add_option("--model,-m", a.model, "model container directory")->required();
  if (needs_data) cmd->add_option("--data,-d", a.data, "dataset container directory")->required();
  cmd->add_option("--config,-c", a.config, "run configuration file");
  cmd->add_option("--out,-o", a.out, "output directory");
  cmd->add_option("--cost-profile", a.cost_profile, "cost profile JSON override");
  cmd->add_option("--rq-table", a.rq_table, "R_Q table JSON override");
  cmd->add_option("--reward-lut", a.reward_lut, "reward LUT CSV override");
  cmd->add_option("--episodes", a.episodes, "episode/evaluation budget override");
  cmd->add_option("--threads", a.threads, "worker threads for fan-out evaluations");
  cmd->add_option("--seed", a.seed, "random seed")->each([&a](const std::string&) {
    a.seed_set = true;
  });
}

RunConfig make_config(const CommonArgs& a) {
  RunConfig cfg = a.config.empty() ? RunConfig{} : load_run_config(a.config);
  if (!a.model.empty()) cfg.model_path = a.model;
  if (!a.data.empty()) cfg.data_path = a.data;
  if (!a.out.empty()) cfg.out_dir = a.out;
  if (!a.cost_profile.empty()) cfg.cost_profile_path = a.cost_profile;
  if (!a.rq_table.empty()) cfg.rq_table_path = a.rq_table;
  if (!a.reward_lut.empty()) cfg.lut_csv_path = a.reward_lut;
  if (a.seed_set) cfg.seed = a.seed;
  if (a.episodes > 0) {
    cfg.episodes = a.episodes;
    cfg.warmup = std::min(cfg.warmup, cfg.episodes / 2);
    cfg.ga_generations = std::max(1, a.episodes / std::max(1, cfg.ga_population));
  }
  if (a.threads > 0) cfg.threads = a.threads;
  apply_env_overrides(cfg);
  return cfg;
}

int run_search_command(const CommonArgs& args, const std::string& kind) {
  RunConfig cfg = make_config(args);
  const ModelGraph model = load_model(cfg.model_path);
  const Dataset data = load_dataset(cfg.data_path);
  CompressionEnv env(model, data, cfg);
  SearchReport report;
  if (kind == "rl") report = run_search(env, cfg);
  else if (kind == "ga") report = run_ga_search(env, cfg);
  else report = run_random_search(env, cfg);
  write_report(cfg.out_dir, report, env);
  const auto& best = report.best();
  std::cout << kind << " search done: " << report.records.size() << " evaluations in "
            << report.duration_sec << " s\n"
            << "best reward " << best.reward << " (loss " << best.loss_pct << "%, gain "
            << best.gain_pct << "%)\n"
            << "report written to " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hardware-aware one-shot DNN compression explorer"};
  app.require_subcommand(1);

  CommonArgs rl_args, ga_args, rnd_args, eval_args, energy_args, sweep_args;
  std::string plan_path, experiment;

  auto* rl = app.add_subcommand("compress", "composite RL search over pruning + quantization");
  add_common(rl, rl_args, true);

  auto* ga = app.add_subcommand("ga", "NSGA-II baseline search under the same evaluator");
  add_common(ga, ga_args, true);

  auto* rnd = app.add_subcommand("random", "uniform-random policy baseline");
  add_common(rnd, rnd_args, true);

  auto* ev = app.add_subcommand("evaluate", "score one compression plan");
  add_common(ev, eval_args, true);
  ev->add_option("--plan,-p", plan_path, "compression plan JSON")->required();

  auto* en = app.add_subcommand("energy-report", "per-layer energy of the dense model");
  add_common(en, energy_args, false);

  auto* sw = app.add_subcommand("sweep", "built-in experiments");
  add_common(sw, sweep_args, true);
  sw->add_option("--experiment,-e", experiment, "pruning-sweep | uniform-vs-mixed")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rl->parsed()) return run_search_command(rl_args, "rl");
    if (ga->parsed()) return run_search_command(ga_args, "ga");
    if (rnd->parsed()) return run_search_command(rnd_args, "random");

    if (ev->parsed()) {
      RunConfig cfg = make_config(eval_args);
      const ModelGraph model = load_model(cfg.model_path);
      const Dataset data = load_dataset(cfg.data_path);
      CompressionEnv env(model, data, cfg);
      auto raw = read_file(plan_path);
      const CompressionPlan plan = plan_from_json(std::string(raw.begin(), raw.end()));
      std::cout << evaluation_json(env, plan, cfg.seed);
      return 0;
    }

    if (en->parsed()) {
      RunConfig cfg = make_config(energy_args);
      const ModelGraph model = load_model(cfg.model_path);
      const CostProfile profile = cfg.cost_profile_path.empty()
                                      ? analytic_cost_provider(model)
                                      : load_cost_profile(cfg.cost_profile_path, model);
      const PowerRatioTable table = cfg.rq_table_path.empty()
                                        ? PowerRatioTable::defaults()
                                        : load_rq_table(cfg.rq_table_path);
      std::vector<LayerEnergyAction> dense(static_cast<size_t>(model.layer_count()));
      const auto breakdown = total_energy(model, dense, profile, table);
      std::cout << "layer,comp,acc,e_comp,e_mem,e_total\n";
      for (int t = 0; t < model.layer_count(); ++t) {
        const auto& e = breakdown.layers[static_cast<size_t>(t)];
        std::cout << t << ',' << profile.comp[static_cast<size_t>(t)] << ','
                  << profile.acc[static_cast<size_t>(t)] << ',' << e.e_comp << ',' << e.e_mem
                  << ',' << e.total() << '\n';
      }
      std::cout << "total," << breakdown.total << '\n';
      return 0;
    }

    if (sw->parsed()) {
      RunConfig cfg = make_config(sweep_args);
      const ModelGraph model = load_model(cfg.model_path);
      const Dataset data = load_dataset(cfg.data_path);
      CompressionEnv env(model, data, cfg);
      std::string out;
      if (experiment == "pruning-sweep") out = experiment_pruning_sweep(env);
      else if (experiment == "uniform-vs-mixed") out = experiment_uniform_vs_mixed(env);
      else throw std::runtime_error("unknown experiment: " + experiment);
      if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        write_file(cfg.out_dir + "/" + experiment + ".json", out.data(), out.size());
      }
      std::cout << out;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
