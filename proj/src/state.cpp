#include "cforge/state.hpp"

#include <algorithm>

namespace cforge {

StateContext::StateContext(const ModelGraph& model, const CostProfile& profile,
                           const PowerRatioTable& table) {
  const int L = model.layer_count();
  std::vector<LayerEnergyAction> dense(static_cast<size_t>(L));
  EnergyBreakdown base = total_energy(model, dense, profile, table);
  total_energy_ = base.total;

  for (int t = 0; t < L; ++t) {
    const auto& d = model.layers[static_cast<size_t>(t)];
    layer_energy_.push_back(base.layers[static_cast<size_t>(t)].total());
    std::vector<double> f(11, 0.0);
    f[0] = t;
    if (d.kind == LayerKind::conv) {
      f[1] = 0.0;
      f[2] = d.c_out;
      f[3] = d.c_in;
      f[4] = d.h_in;
      f[5] = d.w_in;
      f[6] = d.stride;
      f[7] = d.k;
    } else {
      f[1] = 1.0;
      f[2] = d.m_in;
      f[3] = d.n_out;
      f[4] = d.h_in;
      f[5] = d.w_in;
      f[6] = 0.0;
      f[7] = 1.0;
    }
    f[8] = layer_energy_.back();
    f[9] = static_cast<double>(d.param_count());
    f[10] = static_cast<double>(d.memory_bits());
    static_features_.push_back(std::move(f));
  }

  feat_min_.assign(11, 0.0);
  feat_max_.assign(11, 0.0);
  for (int k = 0; k < 11; ++k) {
    double lo = static_features_[0][static_cast<size_t>(k)];
    double hi = lo;
    for (int t = 1; t < L; ++t) {
      lo = std::min(lo, static_features_[static_cast<size_t>(t)][static_cast<size_t>(k)]);
      hi = std::max(hi, static_features_[static_cast<size_t>(t)][static_cast<size_t>(k)]);
    }
    feat_min_[static_cast<size_t>(k)] = lo;
    feat_max_[static_cast<size_t>(k)] = hi;
  }
}

LayerState StateContext::make(int layer, double energy_reduced_so_far,
                              double prev_sparsity_action) const {
  require(layer >= 0 && layer < layer_count(), "state: layer index out of range");
  LayerState s;
  s.raw.resize(kStateDim);
  s.normalized.resize(kStateDim);
  const auto& f = static_features_[static_cast<size_t>(layer)];
  for (int k = 0; k < 11; ++k) {
    s.raw[static_cast<size_t>(k)] = static_cast<real>(f[static_cast<size_t>(k)]);
    const double span = feat_max_[static_cast<size_t>(k)] - feat_min_[static_cast<size_t>(k)];
    s.normalized[static_cast<size_t>(k)] =
        span > 0.0 ? static_cast<real>((f[static_cast<size_t>(k)] - feat_min_[static_cast<size_t>(k)]) / span)
                   : real(0);
  }
  s.raw[11] = static_cast<real>(energy_reduced_so_far);
  s.normalized[11] =
      total_energy_ > 0.0
          ? static_cast<real>(std::clamp(energy_reduced_so_far / total_energy_, 0.0, 1.0))
          : real(0);
  s.raw[12] = static_cast<real>(prev_sparsity_action);
  s.normalized[12] = static_cast<real>(std::clamp(prev_sparsity_action, 0.0, 1.0));
  return s;
}

}  // namespace cforge
