#pragma once

#include <string>
#include <vector>

#include "cforge/compress.hpp"
#include "cforge/model.hpp"

namespace cforge {

/// Per-layer MAC and memory-access counts plus unit costs. Defaults come
/// from the analytic provider; a JSON file can override individual layers
/// with externally computed dataflow counts.
struct CostProfile {
  double e_comp = 1.0;
  double e_mem = 10.0;
  std::vector<double> comp;  // dense MACs per layer
  std::vector<double> acc;   // dense memory accesses per layer
};

/// Analytic counts: conv #comp = C_o*C_in*k^2*h_out*w_out, fc #comp = N*M.
/// #acc = weights fetched once + input feature-map reads + output writes.
CostProfile analytic_cost_provider(const ModelGraph& model, double e_comp = 1.0,
                                   double e_mem = 10.0);

/// JSON override: {"e_comp": f, "e_mem": f, "layers": [{"t": i, "comp": n,
/// "acc": n}]}. Unlisted layers keep their analytic counts.
CostProfile load_cost_profile(const std::string& path, const ModelGraph& model);

/// R_Q(Q_W, Q_A): compute-power ratio of a reduced-precision MAC relative to
/// the 8/8-bit baseline, plus the fine-grained zero-operand penalty P_FG.
struct PowerRatioTable {
  double r[7][7];  // indexed [Q_W - 2][Q_A - 2]
  double p_fg = 0.2;

  double rq(int q_w, int q_a) const;
  static PowerRatioTable defaults();
};

PowerRatioTable load_rq_table(const std::string& path);

struct ReductionCoefficients {
  double r_mem = 1.0;
  double r_pruned = 0.0;
  double r_unpruned = 1.0;
};

/// Fine:   R_mem = 1,     R_pruned = P_FG * S, R_unpruned = (1-S) * R_Q.
/// Coarse: R_mem = 1 - S, R_pruned = 0,        R_unpruned = (1-S) * R_Q.
ReductionCoefficients reduction_coefficients(double sparsity, int bits, bool coarse,
                                             const PowerRatioTable& table);

struct LayerEnergy {
  double e_mem = 0.0;
  double e_comp = 0.0;
  double total() const { return e_mem + e_comp; }
};

/// E_mem = #acc * e_mem * R_mem; E_comp = #comp * e_comp * (R_pruned +
/// R_unpruned). Counts are the effective ones (after upstream recounting).
LayerEnergy layer_energy(double comp, double acc, double e_comp, double e_mem,
                         const ReductionCoefficients& rc);

/// What the energy model needs to know about one layer's compression state.
/// `out_survival` is the fraction of surviving output units; it shrinks the
/// effective input-channel count (and therefore #comp and #acc) of the next
/// layer, separate from that layer's own reduction coefficients.
struct LayerEnergyAction {
  double sparsity = 0.0;
  int bits = 8;
  bool coarse = false;
  double out_survival = 1.0;
};

struct EnergyBreakdown {
  std::vector<LayerEnergy> layers;
  std::vector<ReductionCoefficients> coefficients;
  double total = 0.0;
  double baseline = 0.0;  // S = 0, Q = 8 everywhere
  double gain = 0.0;      // 1 - total / baseline
};

EnergyBreakdown total_energy(const ModelGraph& model, const std::vector<LayerEnergyAction>& acts,
                             const CostProfile& profile, const PowerRatioTable& table);

/// Plan-level wrapper: derives achieved sparsities and survivals with floor
/// arithmetic from a resolved plan (no weights needed).
EnergyBreakdown total_energy(const ModelGraph& model, const CompressionPlan& plan,
                             const CostProfile& profile, const PowerRatioTable& table);

std::vector<LayerEnergyAction> plan_energy_actions(const ModelGraph& model,
                                                   const CompressionPlan& plan);
std::vector<LayerEnergyAction> compressed_energy_actions(const CompressedModel& cm);

}  // namespace cforge
