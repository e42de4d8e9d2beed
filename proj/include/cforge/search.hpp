#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cforge/compress.hpp"
#include "cforge/config.hpp"
#include "cforge/dataset.hpp"
#include "cforge/energy.hpp"
#include "cforge/nsga2.hpp"
#include "cforge/reward.hpp"
#include "cforge/state.hpp"

namespace cforge {

struct EvalOutcome {
  double accuracy = 0.0;
  double loss_pct = 0.0;
  double gain_pct = 0.0;
  double reward = 0.0;
  std::vector<double> achieved_sparsity;
  std::vector<int> achieved_bits;
};

/// Shared evaluation context: dense model, seeded validation subset and
/// calibration batch, cost profile, R_Q table and reward LUT. Every searcher
/// (RL, GA, random, sweeps) scores plans through the same evaluate_plan.
class CompressionEnv {
 public:
  CompressionEnv(const ModelGraph& model, const Dataset& data, const RunConfig& cfg);

  /// Accuracy loss and energy gain are measured against the no-op baseline
  /// (dense model fake-quantized at 8 bits), per the one-shot contract: a
  /// fresh copy of the dense model is compressed on every call.
  EvalOutcome evaluate_plan(const CompressionPlan& plan, u64 eval_seed,
                            const std::vector<int>* eval_indices = nullptr) const;

  CompressionPlan no_op_plan() const;

  const ModelGraph& model() const { return model_; }
  const Dataset& data() const { return data_; }
  const StateContext& states() const { return states_; }
  const CostProfile& profile() const { return profile_; }
  const PowerRatioTable& table() const { return table_; }
  const RewardLut& lut() const { return lut_; }
  const RunConfig& config() const { return cfg_; }
  int layer_count() const { return model_.layer_count(); }
  double baseline_accuracy() const { return baseline_accuracy_; }
  const std::vector<int>& validation_indices() const { return val_subset_; }
  const std::vector<int>& probe_indices() const { return probe_subset_; }
  const std::vector<Tensor>& calib_inputs() const { return calib_inputs_; }
  const std::vector<int>& calib_labels() const { return calib_labels_; }

 private:
  ModelGraph model_;
  Dataset data_;
  RunConfig cfg_;
  CostProfile profile_;
  PowerRatioTable table_;
  RewardLut lut_;
  StateContext states_;
  std::vector<int> val_subset_;
  std::vector<int> probe_subset_;
  std::vector<Tensor> calib_inputs_;
  std::vector<int> calib_labels_;
  double baseline_accuracy_ = 0.0;
};

struct EpisodeRecord {
  int episode = 0;
  CompressionPlan plan;
  double accuracy = 0.0;
  double loss_pct = 0.0;
  double gain_pct = 0.0;
  double reward = 0.0;
  double sigma = 0.0;
  bool unlocked = false;
};

struct SearchReport {
  std::string kind;  // rl | random | ga
  u64 seed = 0;
  std::vector<EpisodeRecord> records;
  int best_index = -1;
  double duration_sec = 0.0;
  std::vector<std::pair<double, double>> pareto;  // (loss %, gain %) of visited plans

  const EpisodeRecord& best() const { return records[static_cast<size_t>(best_index)]; }
};

/// Composite-agent search: warm-up with uniform random actions, then DDPG
/// learning with the Rainbow technique head unlocked by the reward monitor.
SearchReport run_search(const CompressionEnv& env, const RunConfig& cfg);

/// Uniform-random policy under the identical budget and evaluator.
SearchReport run_random_search(const CompressionEnv& env, const RunConfig& cfg);

/// NSGA-II baseline over the 3L genome with inverse-reward fitness.
SearchReport run_ga_search(const CompressionEnv& env, const RunConfig& cfg);

CompressionPlan decode_genome(const std::vector<double>& genes, const ModelGraph& model,
                              double s_cap);

void write_report(const std::string& dir, const SearchReport& report, const CompressionEnv& env);

/// Per-layer metrics of one plan (the evaluate CLI output).
std::string evaluation_json(const CompressionEnv& env, const CompressionPlan& plan, u64 seed);

/// Fig-1-style sweep: every technique at a range of sparsities, uniform
/// over layers, 8-bit quantization.
std::string experiment_pruning_sweep(const CompressionEnv& env);

/// Uniform-precision front vs randomly sampled mixed-precision front at
/// zero sparsity; reports both fronts and weak-dominance per uniform point.
std::string experiment_uniform_vs_mixed(const CompressionEnv& env, int mixed_samples = 150);

}  // namespace cforge
