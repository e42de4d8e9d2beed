#pragma once

#include <vector>

#include "cforge/energy.hpp"
#include "cforge/model.hpp"

namespace cforge {

constexpr int kStateDim = 13;

/// Layer embedding fed to the agents. `raw` carries the unnormalized
/// feature order (t, kind, dims..., E_t, P_t, M_t, E_red, a_prev);
/// `normalized` is the min-max scaled copy actually consumed by the nets.
struct LayerState {
  std::vector<real> raw;
  std::vector<real> normalized;
};

/// Precomputes the static per-layer features and their min/max ranges for
/// one model, so episode rollouts only fill in the two dynamic slots
/// (reduced energy so far and the previous sparsity action).
class StateContext {
 public:
  StateContext() = default;
  StateContext(const ModelGraph& model, const CostProfile& profile, const PowerRatioTable& table);

  LayerState make(int layer, double energy_reduced_so_far, double prev_sparsity_action) const;

  double dense_layer_energy(int layer) const { return layer_energy_[static_cast<size_t>(layer)]; }
  double dense_total_energy() const { return total_energy_; }
  int layer_count() const { return static_cast<int>(static_features_.size()); }

 private:
  std::vector<std::vector<double>> static_features_;  // 11 static slots per layer
  std::vector<double> feat_min_, feat_max_;
  std::vector<double> layer_energy_;
  double total_energy_ = 0.0;
};

}  // namespace cforge
