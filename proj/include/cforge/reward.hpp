#pragma once

#include <string>
#include <vector>

#include "cforge/types.hpp"

namespace cforge {

/// 40x40 reward lookup table over (accuracy loss %, energy gain %). Bins are
/// left-closed; loss clamps into [0, 20], gain into [0, 100]. Cell values
/// come from a shape generator that strongly favors the loss < 10% region
/// and penalizes near-no-op actions.
struct RewardLut {
  int loss_bins = 40;
  int gain_bins = 40;
  double loss_max = 20.0;   // percent
  double gain_max = 100.0;  // percent
  std::vector<double> cells;  // loss-major: cells[loss_bin * gain_bins + gain_bin]

  struct BuildConfig {
    int loss_bins = 40;
    int gain_bins = 40;
    double loss_max = 20.0;
    double gain_max = 100.0;
    double low_action_penalty = -0.1;
    double low_gain_threshold = 5.0;   // percent
    double high_loss_knee = 10.0;      // percent
  };

  static RewardLut build(const BuildConfig& cfg);
  static RewardLut build() { return build(BuildConfig{}); }

  int loss_bin(double loss_pct) const;
  int gain_bin(double gain_pct) const;
  double lookup(double loss_pct, double gain_pct) const;

  double max_cell() const;
  double min_cell() const;

  void save_csv(const std::string& path) const;
  static RewardLut load_csv(const std::string& path);
};

}  // namespace cforge
