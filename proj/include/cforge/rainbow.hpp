#pragma once

#include <deque>
#include <functional>

#include "cforge/mlp.hpp"
#include "cforge/replay.hpp"

namespace cforge {

struct RainbowConfig {
  int feature_dim = 300;
  int hidden = 128;
  int actions = 7;
  int atoms = 51;
  double v_min = -1.0;
  double v_max = 1.0;  // set to the reward LUT maximum by the orchestrator
  double lr = 1e-3;
  int n_step = 3;
  double gamma = 1.0;
  int target_update_period = 100;
  double priority_eps = 1e-6;
};

/// Categorical projection of r + gamma * z onto the fixed support (all mass
/// lands on r when done). Output sums to 1.
std::vector<double> distributional_projection(double reward, bool done,
                                              const std::vector<double>& next_dist,
                                              const std::vector<double>& support, double gamma);

/// Distributional dueling agent over the 7 pruning techniques. Input is the
/// DDPG actor's hidden features, treated as constants: updates never touch
/// the DDPG parameters. Final layers of both streams are noisy.
class RainbowAgent {
 public:
  RainbowAgent(const RainbowConfig& cfg, Rng& rng);

  /// Frozen: uniform random technique. Unfrozen: argmax of the expected
  /// atom value under fresh noisy-layer noise.
  int act(const std::vector<real>& features, bool frozen, Rng& rng);

  using FeatureFn = std::function<std::vector<real>(const std::vector<real>& state)>;

  /// One distributional double-Q update on a prioritized batch, with
  /// features recomputed through `feature_fn`.
  double update(PrioritizedReplay& replay, int batch_size, double beta, const FeatureFn& feature_fn,
                Rng& rng);

  /// Per-action categorical distribution (actions x atoms, row-major).
  std::vector<double> distribution(const std::vector<real>& features) const;
  const std::vector<double>& support() const { return support_; }

  std::vector<real> snapshot_params() const;
  void restore_params(const std::vector<real>& blob);
  const RainbowConfig& config() const { return cfg_; }

 private:
  std::vector<double> dist_of(const Mlp& value, const Mlp& adv,
                              const std::vector<real>& features) const;
  int greedy_action(const std::vector<double>& dist) const;

  RainbowConfig cfg_;
  Mlp value_, adv_, value_target_, adv_target_;
  Adam value_opt_, adv_opt_;
  std::vector<double> support_;
  i64 updates_ = 0;
};

/// Gate that unlocks Rainbow training once the episode-reward moving
/// average shows sustained improvement. Unlock is sticky.
class RewardMonitor {
 public:
  RewardMonitor(int window = 20, int consecutive = 5)
      : window_(window), needed_(consecutive) {}

  bool observe(double episode_reward);
  bool unlocked() const { return unlocked_; }

 private:
  int window_;
  int needed_;
  int streak_ = 0;
  bool unlocked_ = false;
  bool have_prev_ = false;
  double prev_avg_ = 0.0;
  std::deque<double> rewards_;
};

}  // namespace cforge
