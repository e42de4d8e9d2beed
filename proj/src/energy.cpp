#include "cforge/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "cforge/io.hpp"

using nlohmann::json;

namespace cforge {

CostProfile analytic_cost_provider(const ModelGraph& model, double e_comp, double e_mem) {
  CostProfile p;
  p.e_comp = e_comp;
  p.e_mem = e_mem;
  for (const auto& d : model.layers) {
    if (d.kind == LayerKind::conv) {
      const double macs = static_cast<double>(d.c_out) * d.c_in * d.k * d.k * d.h_out() * d.w_out();
      const double weights = static_cast<double>(d.param_count());
      const double in_reads = static_cast<double>(d.c_in) * d.h_in * d.w_in;
      const double out_writes = static_cast<double>(d.c_out) * d.h_out() * d.w_out();
      p.comp.push_back(macs);
      p.acc.push_back(weights + in_reads + out_writes);
    } else {
      const double macs = static_cast<double>(d.n_out) * d.m_in;
      p.comp.push_back(macs);
      p.acc.push_back(macs + d.m_in + d.n_out);
    }
  }
  return p;
}

CostProfile load_cost_profile(const std::string& path, const ModelGraph& model) {
  CostProfile p = analytic_cost_provider(model);
  auto raw = read_file(path);
  json j = json::parse(raw.begin(), raw.end());
  p.e_comp = j.value("e_comp", p.e_comp);
  p.e_mem = j.value("e_mem", p.e_mem);
  if (j.contains("layers")) {
    for (const auto& e : j.at("layers")) {
      const int t = e.at("t").get<int>();
      require(t >= 0 && t < model.layer_count(), "cost profile: layer index out of range");
      const double comp = e.value("comp", p.comp[static_cast<size_t>(t)]);
      const double acc = e.value("acc", p.acc[static_cast<size_t>(t)]);
      require(comp >= 0.0 && acc >= 0.0, "cost profile: negative counts");
      p.comp[static_cast<size_t>(t)] = comp;
      p.acc[static_cast<size_t>(t)] = acc;
    }
  }
  return p;
}

double PowerRatioTable::rq(int q_w, int q_a) const {
  require(q_w >= 2 && q_w <= 8 && q_a >= 2 && q_a <= 8, "R_Q: bits out of [2,8]");
  return r[q_w - 2][q_a - 2];
}

PowerRatioTable PowerRatioTable::defaults() {
  // Bilinear in Q_W*Q_A, anchored so the 8/8 baseline is exactly 1 and the
  // 5/5 operating point matches the 29% compute-energy reduction of the
  // reference MAC measurements.
  PowerRatioTable t;
  for (int qw = 2; qw <= 8; ++qw) {
    for (int qa = 2; qa <= 8; ++qa) {
      const double v = 1.0 - 0.29 * (64.0 - static_cast<double>(qw) * qa) / 39.0;
      t.r[qw - 2][qa - 2] = std::clamp(v, 1e-9, 1.0);
    }
  }
  t.p_fg = 0.2;
  return t;
}

PowerRatioTable load_rq_table(const std::string& path) {
  auto raw = read_file(path);
  json j = json::parse(raw.begin(), raw.end());
  PowerRatioTable t = PowerRatioTable::defaults();
  if (j.contains("p_fg")) {
    t.p_fg = j.at("p_fg").get<double>();
    require(t.p_fg > 0.0 && t.p_fg < 1.0, "R_Q table: p_fg out of (0,1)");
  }
  if (j.contains("r")) {
    const auto& rows = j.at("r");
    require(rows.is_array() && rows.size() == 7, "R_Q table: expected 7 rows");
    for (int i = 0; i < 7; ++i) {
      require(rows[i].is_array() && rows[i].size() == 7, "R_Q table: expected 7 columns");
      for (int k = 0; k < 7; ++k) {
        const double v = rows[i][k].get<double>();
        require(v > 0.0 && v <= 1.0, "R_Q table: entries must be in (0,1]");
        t.r[i][k] = v;
      }
    }
    require(t.r[6][6] == 1.0, "R_Q table: R(8,8) must be 1");
  }
  return t;
}

ReductionCoefficients reduction_coefficients(double sparsity, int bits, bool coarse,
                                             const PowerRatioTable& table) {
  require(sparsity >= 0.0 && sparsity <= 1.0, "reduction: sparsity out of [0,1]");
  const double rq = table.rq(bits, bits);
  ReductionCoefficients rc;
  if (coarse) {
    rc.r_mem = 1.0 - sparsity;
    rc.r_pruned = 0.0;
  } else {
    rc.r_mem = 1.0;
    rc.r_pruned = table.p_fg * sparsity;
  }
  rc.r_unpruned = (1.0 - sparsity) * rq;
  return rc;
}

LayerEnergy layer_energy(double comp, double acc, double e_comp, double e_mem,
                         const ReductionCoefficients& rc) {
  LayerEnergy e;
  e.e_mem = acc * e_mem * rc.r_mem;
  e.e_comp = comp * e_comp * (rc.r_pruned + rc.r_unpruned);
  return e;
}

EnergyBreakdown total_energy(const ModelGraph& model, const std::vector<LayerEnergyAction>& acts,
                             const CostProfile& profile, const PowerRatioTable& table) {
  const int L = model.layer_count();
  require(static_cast<int>(acts.size()) == L, "total_energy: one action per layer required");
  require(static_cast<int>(profile.comp.size()) == L, "total_energy: profile layer mismatch");
  EnergyBreakdown b;
  double upstream = 1.0;  // surviving fraction of this layer's input channels
  for (int t = 0; t < L; ++t) {
    const auto& a = acts[static_cast<size_t>(t)];
    const auto rc = reduction_coefficients(a.sparsity, a.bits, a.coarse, table);
    // structured pruning upstream shrinks this layer's effective #comp/#acc
    const double comp = profile.comp[static_cast<size_t>(t)] * upstream;
    const double acc = profile.acc[static_cast<size_t>(t)] * upstream;
    b.layers.push_back(layer_energy(comp, acc, profile.e_comp, profile.e_mem, rc));
    b.coefficients.push_back(rc);
    b.total += b.layers.back().total();
    const auto base = layer_energy(profile.comp[static_cast<size_t>(t)],
                                   profile.acc[static_cast<size_t>(t)], profile.e_comp,
                                   profile.e_mem, reduction_coefficients(0.0, 8, false, table));
    b.baseline += base.total();
    upstream = a.out_survival;
  }
  b.gain = b.baseline > 0.0 ? 1.0 - b.total / b.baseline : 0.0;
  return b;
}

std::vector<LayerEnergyAction> plan_energy_actions(const ModelGraph& model,
                                                   const CompressionPlan& plan) {
  require(plan.resolved, "plan_energy_actions: resolve the plan first");
  const int L = model.layer_count();
  std::vector<LayerEnergyAction> acts(static_cast<size_t>(L));
  std::vector<double> imposed(static_cast<size_t>(L), 0.0);  // junction-imposed unit fraction
  for (const auto& link : plan.filter_links) {
    const auto& src_act = plan.actions[static_cast<size_t>(link.src)];
    const int units = model.layers[static_cast<size_t>(link.src)].output_units();
    imposed[static_cast<size_t>(link.dst)] =
        std::floor(src_act.sparsity * units) / static_cast<double>(units);
  }
  for (int t = 0; t < L; ++t) {
    const auto& a = plan.actions[static_cast<size_t>(t)];
    const auto& d = model.layers[static_cast<size_t>(t)];
    auto& out = acts[static_cast<size_t>(t)];
    out.bits = a.bits;
    out.coarse = technique_is_coarse(a.technique);
    const bool unit_mask = out.coarse && a.technique != Technique::fm_reconstruction;
    double own_struct = 0.0;
    if (out.coarse) {
      const int units = unit_mask || d.kind == LayerKind::fc ? d.output_units() : d.input_units();
      own_struct = std::floor(a.sparsity * units) / static_cast<double>(units);
      out.sparsity = own_struct;
    } else {
      out.sparsity = std::floor(a.sparsity * static_cast<double>(d.param_count())) /
                     static_cast<double>(d.param_count());
    }
    // junction-imposed filter mask; overlap with the own mask is unknown at
    // plan level, treated as independent
    const double imp = imposed[static_cast<size_t>(t)];
    if (imp > 0.0) {
      if (unit_mask) {
        out.sparsity = imp;  // identical action replaces the own filter mask
        out.out_survival = 1.0 - imp;
      } else {
        out.sparsity = 1.0 - (1.0 - out.sparsity) * (1.0 - imp);
        out.out_survival = 1.0 - imp;
      }
    } else {
      out.out_survival = (unit_mask || d.kind == LayerKind::fc) && out.coarse ? 1.0 - own_struct : 1.0;
    }
  }
  return acts;
}

std::vector<LayerEnergyAction> compressed_energy_actions(const CompressedModel& cm) {
  std::vector<LayerEnergyAction> acts;
  for (int t = 0; t < cm.graph.layer_count(); ++t) {
    const auto& lc = cm.layers[static_cast<size_t>(t)];
    LayerEnergyAction a;
    a.sparsity = lc.achieved_sparsity;
    a.bits = lc.bits;
    a.coarse = lc.coarse;
    a.out_survival = cm.out_survival(t);
    acts.push_back(a);
  }
  return acts;
}

EnergyBreakdown total_energy(const ModelGraph& model, const CompressionPlan& plan,
                             const CostProfile& profile, const PowerRatioTable& table) {
  return total_energy(model, plan_energy_actions(model, plan), profile, table);
}

}  // namespace cforge
