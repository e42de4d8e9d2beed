#include "cforge/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <future>
#include <mutex>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "cforge/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace cforge {

namespace {

// deterministic parallel map: results land by index, every item derives its
// own randomness from the item index, so the thread count never changes
// results
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> futs;
  std::atomic<int> next{0};
  const int workers = std::min(threads, n);
  for (int w = 0; w < workers; ++w) {
    futs.push_back(std::async(std::launch::async, [&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    }));
  }
  for (auto& f : futs) f.get();
}

}  // namespace

CompressionEnv::CompressionEnv(const ModelGraph& model, const Dataset& data, const RunConfig& cfg)
    : model_(model), data_(data), cfg_(cfg) {
  cfg_.validate();
  model_.validate();
  profile_ = cfg.cost_profile_path.empty()
                 ? analytic_cost_provider(model_)
                 : load_cost_profile(cfg.cost_profile_path, model_);
  table_ = cfg.rq_table_path.empty() ? PowerRatioTable::defaults()
                                     : load_rq_table(cfg.rq_table_path);
  lut_ = cfg.lut_csv_path.empty() ? RewardLut::build() : RewardLut::load_csv(cfg.lut_csv_path);
  states_ = StateContext(model_, profile_, table_);

  // one seeded subset per run so reward noise tracks policy changes only
  val_subset_ = data_.validation_subset(cfg.validation_fraction, cfg.seed);
  probe_subset_ = data_.validation_subset(cfg.probe_fraction, Rng::derive(cfg.seed, 0x9b0beULL));

  auto train = data_.indices_of(Split::train_calib);
  if (train.empty()) train = data_.indices_of(Split::validation);
  Rng rng(Rng::derive(cfg.seed, 0xca11bULL));
  for (int i = 0; i < cfg.calib_batch && i < static_cast<int>(train.size()); ++i) {
    const int j = i + rng.uniform_int(0, static_cast<int>(train.size()) - 1 - i);
    std::swap(train[static_cast<size_t>(i)], train[static_cast<size_t>(j)]);
    calib_inputs_.push_back(data_.inputs[static_cast<size_t>(train[static_cast<size_t>(i)])]);
    calib_labels_.push_back(data_.labels[static_cast<size_t>(train[static_cast<size_t>(i)])]);
  }

  // the loss/gain reference point: dense weights fake-quantized at 8 bits
  {
    ApplyOptions opts;
    opts.seed = Rng::derive(cfg_.seed, 0xba5eULL);
    CompressedModel cm = apply_plan(model_, no_op_plan(), calib_inputs_, calib_labels_, opts);
    baseline_accuracy_ = evaluate_accuracy(cm.graph, data_, val_subset_, cm.act_hook());
  }
}

CompressionPlan CompressionEnv::no_op_plan() const {
  CompressionPlan plan;
  for (int t = 0; t < model_.layer_count(); ++t)
    plan.actions.push_back({t, Technique::level, 0.0, 8});
  return resolve_dependencies(model_, plan);
}

EvalOutcome CompressionEnv::evaluate_plan(const CompressionPlan& plan, u64 eval_seed,
                                          const std::vector<int>* eval_indices) const {
  CompressionPlan resolved = plan.resolved ? plan : resolve_dependencies(model_, plan);
  ApplyOptions opts;
  opts.quantize = true;
  opts.seed = eval_seed;
  CompressedModel cm = apply_plan(model_, resolved, calib_inputs_, calib_labels_, opts);

  const std::vector<int>& idx = eval_indices ? *eval_indices : val_subset_;
  EvalOutcome out;
  out.accuracy = evaluate_accuracy(cm.graph, data_, idx, cm.act_hook());
  out.loss_pct = (baseline_accuracy_ - out.accuracy) * 100.0;

  const auto breakdown = total_energy(model_, compressed_energy_actions(cm), profile_, table_);
  out.gain_pct = breakdown.gain * 100.0;
  out.reward = lut_.lookup(std::max(out.loss_pct, 0.0), std::max(out.gain_pct, 0.0));
  for (int t = 0; t < model_.layer_count(); ++t) {
    out.achieved_sparsity.push_back(cm.layers[static_cast<size_t>(t)].achieved_sparsity);
    out.achieved_bits.push_back(cm.layers[static_cast<size_t>(t)].bits);
  }
  return out;
}

namespace {

struct AgentStack {
  Rng init_rng;  // net initialization stream; must precede the agents
  DdpgAgent ddpg;
  RainbowAgent rainbow;
  PrioritizedReplay ddpg_replay;
  PrioritizedReplay rainbow_replay;
  RewardMonitor monitor;
  Rng rng;

  AgentStack(const RunConfig& cfg, double lut_max, u64 seed)
      : init_rng(Rng::derive(seed, 0xdd96ULL)),
        ddpg(cfg.ddpg, init_rng),
        rainbow(make_rainbow_cfg(cfg, lut_max), init_rng),
        ddpg_replay(cfg.replay_capacity, cfg.per_alpha),
        rainbow_replay(cfg.replay_capacity, cfg.per_alpha),
        monitor(cfg.monitor_window, cfg.monitor_consecutive),
        rng(Rng::derive(seed, 0xac7ULL)) {}

  static RainbowConfig make_rainbow_cfg(const RunConfig& cfg, double lut_max) {
    RainbowConfig rc = cfg.rainbow;
    rc.feature_dim = cfg.ddpg.hidden;
    rc.v_max = lut_max;
    return rc;
  }
};

struct StepChoice {
  LayerState state;
  std::array<double, 2> ddpg_action;
  int technique;
};

// one full pass over the layers; fills transitions and returns the plan
struct RolloutResult {
  CompressionPlan plan;
  std::vector<StepChoice> steps;
};

RolloutResult rollout(const CompressionEnv& env, AgentStack* agents, bool warmup, bool frozen,
                      Rng& rng) {
  const int L = env.layer_count();
  const auto& cfg = env.config();
  RolloutResult rr;
  double e_red = 0.0;
  double prev_a_s = 0.0;
  for (int t = 0; t < L; ++t) {
    StepChoice sc;
    sc.state = env.states().make(t, e_red, prev_a_s);
    if (warmup || !agents) {
      sc.ddpg_action = {rng.uniform(), rng.uniform()};
      sc.technique = rng.uniform_int(0, kTechniqueCount - 1);
    } else {
      sc.ddpg_action = agents->ddpg.act(sc.state.normalized, true, agents->rng);
      const auto features = agents->ddpg.features(sc.state.normalized);
      sc.technique = agents->rainbow.act(features, frozen, agents->rng);
    }
    const auto [sparsity, bits] = map_actions(sc.ddpg_action[0], sc.ddpg_action[1], cfg.s_cap);
    const auto tech = static_cast<Technique>(sc.technique);
    rr.plan.actions.push_back({t, tech, sparsity, bits});

    // track the energy reduced so far for the next state's embedding,
    // using this layer's dense counts and its own reduction coefficients
    const auto rc = reduction_coefficients(sparsity, bits, technique_is_coarse(tech), env.table());
    const auto le = layer_energy(env.profile().comp[static_cast<size_t>(t)],
                                 env.profile().acc[static_cast<size_t>(t)], env.profile().e_comp,
                                 env.profile().e_mem, rc);
    e_red += env.states().dense_layer_energy(t) - le.total();
    prev_a_s = sc.ddpg_action[0];
    rr.steps.push_back(std::move(sc));
  }
  rr.plan = resolve_dependencies(env.model(), rr.plan);
  return rr;
}

std::vector<double> step_rewards(const CompressionEnv& env, const RolloutResult& rr,
                                 const EvalOutcome& final_outcome, u64 eval_seed) {
  const int L = env.layer_count();
  std::vector<double> r(static_cast<size_t>(L), 0.0);
  if (env.config().reward_mode == "probe") {
    // literal per-step feedback: evaluate the partial plan on a small probe
    // subset after each action
    for (int t = 0; t < L; ++t) {
      CompressionPlan partial = rr.plan;
      partial.resolved = false;
      for (int u = t + 1; u < L; ++u)
        partial.actions[static_cast<size_t>(u)] = {u, Technique::level, 0.0, 8};
      const auto probe = env.evaluate_plan(partial, eval_seed, &env.probe_indices());
      r[static_cast<size_t>(t)] = probe.reward;
    }
  } else {
    r[static_cast<size_t>(L - 1)] = final_outcome.reward;
  }
  return r;
}

void push_transitions(const CompressionEnv& env, AgentStack& agents, const RolloutResult& rr,
                      const std::vector<double>& rewards) {
  const int L = env.layer_count();
  const double gamma = env.config().rainbow.gamma;
  const int n_step = std::max(1, env.config().rainbow.n_step);
  for (int t = 0; t < L; ++t) {
    Transition tr;
    tr.state = rr.steps[static_cast<size_t>(t)].state.normalized;
    tr.ddpg_action = rr.steps[static_cast<size_t>(t)].ddpg_action;
    tr.rainbow_action = rr.steps[static_cast<size_t>(t)].technique;
    tr.reward = rewards[static_cast<size_t>(t)];
    tr.done = t == L - 1;
    tr.next_state = tr.done ? tr.state : rr.steps[static_cast<size_t>(t + 1)].state.normalized;

    double acc = 0.0, disc = 1.0;
    int k = 0;
    for (; k < n_step && t + k < L; ++k) {
      acc += disc * rewards[static_cast<size_t>(t + k)];
      disc *= gamma;
    }
    tr.nstep_return = acc;
    tr.nstep_discount = disc;
    if (t + k < L) {
      tr.nstep_done = false;
      tr.nstep_state = rr.steps[static_cast<size_t>(t + k)].state.normalized;
    } else {
      tr.nstep_done = true;
      tr.nstep_state = tr.state;
    }
    agents.ddpg_replay.push(tr);
    agents.rainbow_replay.push(std::move(tr));
  }
}

std::vector<std::pair<double, double>> pareto_of(const std::vector<EpisodeRecord>& records) {
  // minimize loss, maximize gain
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) pts.emplace_back(r.loss_pct, r.gain_pct);
  std::vector<std::pair<double, double>> front;
  for (const auto& p : pts) {
    bool dominated = false;
    for (const auto& q : pts) {
      if ((q.first < p.first && q.second >= p.second) ||
          (q.first <= p.first && q.second > p.second)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(p);
  }
  std::sort(front.begin(), front.end());
  front.erase(std::unique(front.begin(), front.end()), front.end());
  return front;
}

void finalize_report(SearchReport& report) {
  report.best_index = 0;
  for (size_t i = 1; i < report.records.size(); ++i)
    if (report.records[i].reward > report.records[static_cast<size_t>(report.best_index)].reward)
      report.best_index = static_cast<int>(i);
  report.pareto = pareto_of(report.records);
}

}  // namespace

SearchReport run_search(const CompressionEnv& env, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SearchReport report;
  report.kind = "rl";
  report.seed = cfg.seed;

  AgentStack agents(cfg, env.lut().max_cell(), cfg.seed);
  Rng warmup_rng(Rng::derive(cfg.seed, 0x3a9dULL));
  const int L = env.layer_count();

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const bool warmup = ep < cfg.warmup;
    const bool frozen = !agents.monitor.unlocked();
    RolloutResult rr = rollout(env, warmup ? nullptr : &agents, warmup, frozen, warmup_rng);
    const u64 eval_seed = Rng::derive(cfg.seed, 0xe9a1ULL + static_cast<u64>(ep));
    const EvalOutcome outcome = env.evaluate_plan(rr.plan, eval_seed);
    const auto rewards = step_rewards(env, rr, outcome, eval_seed);
    push_transitions(env, agents, rr, rewards);

    EpisodeRecord rec;
    rec.episode = ep;
    rec.plan = rr.plan;
    rec.accuracy = outcome.accuracy;
    rec.loss_pct = outcome.loss_pct;
    rec.gain_pct = outcome.gain_pct;
    rec.reward = outcome.reward;
    rec.sigma = agents.ddpg.sigma();
    rec.unlocked = agents.monitor.unlocked();

    if (!warmup) {
      const double progress =
          static_cast<double>(ep - cfg.warmup + 1) / std::max(1, cfg.episodes - cfg.warmup);
      const double beta = cfg.per_beta0 + (1.0 - cfg.per_beta0) * progress;
      if (agents.ddpg_replay.size() >= cfg.batch_size) {
        for (int u = 0; u < L; ++u)
          agents.ddpg.update(agents.ddpg_replay, cfg.batch_size, beta, agents.rng);
      }
      if (agents.monitor.unlocked() && agents.rainbow_replay.size() >= cfg.batch_size) {
        const auto feature_fn = [&agents](const std::vector<real>& s) {
          return agents.ddpg.features(s);
        };
        for (int u = 0; u < L; ++u)
          agents.rainbow.update(agents.rainbow_replay, cfg.batch_size, beta, feature_fn,
                                agents.rng);
      }
      const double episode_reward =
          std::accumulate(rewards.begin(), rewards.end(), 0.0);
      agents.monitor.observe(episode_reward);
      agents.ddpg.decay_sigma();
      rec.unlocked = agents.monitor.unlocked();
    }
    report.records.push_back(std::move(rec));
  }

  finalize_report(report);
  report.duration_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SearchReport run_random_search(const CompressionEnv& env, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SearchReport report;
  report.kind = "random";
  report.seed = cfg.seed;
  Rng rng(Rng::derive(cfg.seed, 0x3a9dULL));  // same stream as the RL warm-up
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    RolloutResult rr = rollout(env, nullptr, true, true, rng);
    const u64 eval_seed = Rng::derive(cfg.seed, 0xe9a1ULL + static_cast<u64>(ep));
    const EvalOutcome outcome = env.evaluate_plan(rr.plan, eval_seed);
    EpisodeRecord rec;
    rec.episode = ep;
    rec.plan = rr.plan;
    rec.accuracy = outcome.accuracy;
    rec.loss_pct = outcome.loss_pct;
    rec.gain_pct = outcome.gain_pct;
    rec.reward = outcome.reward;
    report.records.push_back(std::move(rec));
  }
  finalize_report(report);
  report.duration_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

CompressionPlan decode_genome(const std::vector<double>& genes, const ModelGraph& model,
                              double s_cap) {
  const int L = model.layer_count();
  require(static_cast<int>(genes.size()) == 3 * L, "decode_genome: expected 3L genes");
  CompressionPlan plan;
  for (int t = 0; t < L; ++t) {
    const double gs = std::clamp(genes[static_cast<size_t>(3 * t)], 0.0, 1.0);
    const double gq = std::clamp(genes[static_cast<size_t>(3 * t + 1)], 0.0, 1.0);
    const double gt = std::clamp(genes[static_cast<size_t>(3 * t + 2)], 0.0, 1.0);
    const auto [sparsity, bits] = map_actions(gs, gq, s_cap);
    plan.actions.push_back({t, technique_from_unit(gt), sparsity, bits});
  }
  return resolve_dependencies(model, plan);
}

SearchReport run_ga_search(const CompressionEnv& env, const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  SearchReport report;
  report.kind = "ga";
  report.seed = cfg.seed;

  std::mutex mu;
  nsga2::Config gcfg;
  gcfg.population = cfg.ga_population;
  gcfg.generations = cfg.ga_generations;
  gcfg.eta_c = cfg.ga_eta_c;
  gcfg.eta_m = cfg.ga_eta_m;
  gcfg.crossover_rate = cfg.ga_crossover_rate;
  gcfg.mutation_rate = cfg.ga_mutation_rate;
  gcfg.seed = Rng::derive(cfg.seed, 0x6a6aULL);

  const auto reward_fn = [&](const std::vector<double>& genes, i64 eval_index) {
    const CompressionPlan plan = decode_genome(genes, env.model(), cfg.s_cap);
    const u64 eval_seed = Rng::derive(cfg.seed, 0xe9a1ULL + static_cast<u64>(eval_index));
    const EvalOutcome outcome = env.evaluate_plan(plan, eval_seed);
    EpisodeRecord rec;
    rec.episode = static_cast<int>(eval_index);
    rec.plan = plan;
    rec.accuracy = outcome.accuracy;
    rec.loss_pct = outcome.loss_pct;
    rec.gain_pct = outcome.gain_pct;
    rec.reward = outcome.reward;
    {
      std::lock_guard<std::mutex> lock(mu);
      report.records.push_back(std::move(rec));
    }
    return outcome.reward;
  };

  nsga2::evolve(3 * env.layer_count(), reward_fn, gcfg);
  std::sort(report.records.begin(), report.records.end(),
            [](const EpisodeRecord& a, const EpisodeRecord& b) { return a.episode < b.episode; });
  finalize_report(report);
  report.duration_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

json record_json(const EpisodeRecord& r) {
  json plan = json::parse(plan_to_json(r.plan));
  return json{{"episode", r.episode},  {"accuracy", r.accuracy}, {"loss_pct", r.loss_pct},
              {"gain_pct", r.gain_pct}, {"reward", r.reward},     {"sigma", r.sigma},
              {"unlocked", r.unlocked}, {"plan", plan}};
}

}  // namespace

void write_report(const std::string& dir, const SearchReport& report,
                  const CompressionEnv& env) {
  fs::create_directories(dir);
  json j;
  j["kind"] = report.kind;
  j["seed"] = report.seed;
  j["episodes"] = report.records.size();
  j["duration_sec"] = report.duration_sec;
  j["baseline_accuracy"] = env.baseline_accuracy();
  j["best"] = record_json(report.best());
  j["pareto"] = json::array();
  for (const auto& [loss, gain] : report.pareto) j["pareto"].push_back({loss, gain});
  j["records"] = json::array();
  for (const auto& r : report.records) j["records"].push_back(record_json(r));
  const std::string text = j.dump(2) + "\n";
  write_file(dir + "/report.json", text.data(), text.size());

  std::ostringstream csv;
  csv << "episode,reward,loss_pct,gain_pct,sigma,unlocked\n";
  for (const auto& r : report.records)
    csv << r.episode << ',' << r.reward << ',' << r.loss_pct << ',' << r.gain_pct << ','
        << r.sigma << ',' << (r.unlocked ? 1 : 0) << '\n';
  const std::string csv_text = csv.str();
  write_file(dir + "/curves.csv", csv_text.data(), csv_text.size());

  const std::string plan_text = plan_to_json(report.best().plan);
  write_file(dir + "/best_plan.json", plan_text.data(), plan_text.size());
}

std::string evaluation_json(const CompressionEnv& env, const CompressionPlan& plan, u64 seed) {
  require(static_cast<int>(plan.actions.size()) == env.layer_count(),
          "evaluate: plan does not match the model's layer count");
  const auto outcome = env.evaluate_plan(plan, seed);
  json j;
  j["accuracy"] = outcome.accuracy;
  j["baseline_accuracy"] = env.baseline_accuracy();
  j["loss_pct"] = outcome.loss_pct;
  j["gain_pct"] = outcome.gain_pct;
  j["reward"] = outcome.reward;
  j["layers"] = json::array();
  const auto resolved = resolve_dependencies(env.model(), plan);
  const auto breakdown =
      total_energy(env.model(), resolved, env.profile(), env.table());
  for (int t = 0; t < env.layer_count(); ++t) {
    j["layers"].push_back({{"layer", t},
                           {"technique", technique_name(plan.actions[static_cast<size_t>(t)].technique)},
                           {"requested_sparsity", plan.actions[static_cast<size_t>(t)].sparsity},
                           {"achieved_sparsity", outcome.achieved_sparsity[static_cast<size_t>(t)]},
                           {"bits", outcome.achieved_bits[static_cast<size_t>(t)]},
                           {"e_mem", breakdown.layers[static_cast<size_t>(t)].e_mem},
                           {"e_comp", breakdown.layers[static_cast<size_t>(t)].e_comp}});
  }
  return j.dump(2) + "\n";
}

std::string experiment_pruning_sweep(const CompressionEnv& env) {
  const auto& cfg = env.config();
  json rows = json::array();
  std::vector<json> slot;
  std::vector<std::pair<int, double>> grid;
  for (int tech = 0; tech < kTechniqueCount; ++tech)
    for (double s = 0.1; s <= 0.901; s += 0.1) grid.emplace_back(tech, s);
  slot.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), cfg.threads, [&](int i) {
    const auto [tech, s] = grid[static_cast<size_t>(i)];
    CompressionPlan plan;
    for (int t = 0; t < env.layer_count(); ++t)
      plan.actions.push_back({t, static_cast<Technique>(tech), s, 8});
    const auto outcome =
        env.evaluate_plan(plan, Rng::derive(cfg.seed, 0x5eedULL + static_cast<u64>(i)));
    slot[static_cast<size_t>(i)] = {{"technique", technique_name(static_cast<Technique>(tech))},
                                    {"sparsity", s},
                                    {"loss_pct", outcome.loss_pct},
                                    {"gain_pct", outcome.gain_pct}};
  });
  for (auto& s : slot) rows.push_back(std::move(s));
  json j;
  j["experiment"] = "pruning-sweep";
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string experiment_uniform_vs_mixed(const CompressionEnv& env, int mixed_samples) {
  const auto& cfg = env.config();
  const int L = env.layer_count();

  auto eval_bits = [&](const std::vector<int>& bits, u64 seed) {
    CompressionPlan plan;
    for (int t = 0; t < L; ++t) plan.actions.push_back({t, Technique::level, 0.0, bits[static_cast<size_t>(t)]});
    return env.evaluate_plan(plan, seed);
  };

  json uniform = json::array();
  std::vector<std::pair<double, double>> mixed_pts;
  for (int q = 2; q <= 8; ++q) {
    const auto outcome = eval_bits(std::vector<int>(static_cast<size_t>(L), q),
                                   Rng::derive(cfg.seed, 0x0f0aULL + static_cast<u64>(q)));
    uniform.push_back({{"bits", q}, {"loss_pct", outcome.loss_pct}, {"gain_pct", outcome.gain_pct}});
    mixed_pts.emplace_back(outcome.loss_pct, outcome.gain_pct);  // uniform is a member of the mixed space
  }

  std::vector<std::pair<double, double>> sampled(static_cast<size_t>(mixed_samples));
  parallel_for(mixed_samples, cfg.threads, [&](int i) {
    Rng rng(Rng::derive(cfg.seed, 0x31a5ULL + static_cast<u64>(i)));
    std::vector<int> bits(static_cast<size_t>(L));
    for (auto& b : bits) b = rng.uniform_int(2, 8);
    const auto outcome = eval_bits(bits, Rng::derive(cfg.seed, 0x77e0ULL + static_cast<u64>(i)));
    sampled[static_cast<size_t>(i)] = {outcome.loss_pct, outcome.gain_pct};
  });
  mixed_pts.insert(mixed_pts.end(), sampled.begin(), sampled.end());

  // pareto of the mixed set: minimize loss, maximize gain
  std::vector<std::pair<double, double>> front;
  for (const auto& p : mixed_pts) {
    bool dominated = false;
    for (const auto& q : mixed_pts)
      if ((q.first < p.first && q.second >= p.second) ||
          (q.first <= p.first && q.second > p.second)) {
        dominated = true;
        break;
      }
    if (!dominated) front.push_back(p);
  }
  std::sort(front.begin(), front.end());
  front.erase(std::unique(front.begin(), front.end()), front.end());

  bool weakly_dominates = true;
  for (const auto& u : uniform) {
    const double ul = u.at("loss_pct").get<double>();
    const double ug = u.at("gain_pct").get<double>();
    bool covered = false;
    for (const auto& [ml, mg] : front)
      if (ml <= ul && mg >= ug) {
        covered = true;
        break;
      }
    if (!covered) weakly_dominates = false;
  }

  json j;
  j["experiment"] = "uniform-vs-mixed";
  j["uniform"] = uniform;
  j["mixed_front"] = json::array();
  for (const auto& [l, g] : front) j["mixed_front"].push_back({l, g});
  j["mixed_samples"] = mixed_samples;
  j["mixed_weakly_dominates_uniform"] = weakly_dominates;
  return j.dump(2) + "\n";
}

}  // namespace cforge
