#include "cforge/compress.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>

#include "json.hpp"

#include "cforge/linalg.hpp"
#include "cforge/rng.hpp"

using nlohmann::json;

namespace cforge {

namespace {
constexpr const char* kTechniqueNames[kTechniqueCount] = {
    "sensitivity", "level", "splicing", "l1_ranked", "l2_ranked", "bernoulli",
    "fm_reconstruction"};
}

const char* technique_name(Technique t) { return kTechniqueNames[static_cast<int>(t)]; }

Technique technique_from_name(const std::string& name) {
  for (int i = 0; i < kTechniqueCount; ++i)
    if (name == kTechniqueNames[i]) return static_cast<Technique>(i);
  throw std::runtime_error("unknown technique: " + name);
}

bool technique_is_coarse(Technique t) {
  return t == Technique::l1_ranked || t == Technique::l2_ranked || t == Technique::bernoulli ||
         t == Technique::fm_reconstruction;
}

i64 PruningMask::kept() const {
  i64 n = 0;
  for (auto k : keep) n += k ? 1 : 0;
  return n;
}

namespace {

i64 prune_count(double sparsity, i64 units) {
  require(sparsity >= 0.0 && sparsity <= 1.0, "sparsity out of [0,1]");
  return static_cast<i64>(std::floor(sparsity * static_cast<double>(units)));
}

// Indices of the n smallest scores, ties resolved toward the lower index
// (stable partial sort on (score, index)).
std::vector<i64> smallest_n(const std::vector<double>& score, i64 n) {
  std::vector<i64> idx(score.size());
  std::iota(idx.begin(), idx.end(), i64(0));
  std::stable_sort(idx.begin(), idx.end(),
                   [&score](i64 a, i64 b) { return score[a] < score[b]; });
  idx.resize(static_cast<size_t>(n));
  return idx;
}

PruningMask mask_from_scores(int layer, MaskGranularity g, const std::vector<double>& score,
                             double sparsity) {
  PruningMask m;
  m.layer = layer;
  m.granularity = g;
  m.keep.assign(score.size(), 1);
  for (i64 i : smallest_n(score, prune_count(sparsity, static_cast<i64>(score.size()))))
    m.keep[static_cast<size_t>(i)] = 0;
  return m;
}

}  // namespace

PruningMask prune_level(const Tensor& w, double sparsity) {
  std::vector<double> score(w.data.size());
  for (size_t i = 0; i < score.size(); ++i) score[i] = std::abs(static_cast<double>(w.data[i]));
  return mask_from_scores(0, MaskGranularity::element, score, sparsity);
}

PruningMask prune_sensitivity(const ModelGraph& model, const std::vector<Tensor>& calib_inputs,
                              const std::vector<int>& calib_labels, int layer, double sparsity) {
  require(!calib_inputs.empty(), "sensitivity pruning needs a calibration batch");
  LayerGradients g = loss_gradients(model, calib_inputs, calib_labels);
  const Tensor& w = model.weights[layer];
  const Tensor& dw = g.dw[layer];
  bool all_zero = true;
  for (real v : dw.data)
    if (v != real(0)) {
      all_zero = false;
      break;
    }
  std::vector<double> score(w.data.size());
  for (size_t i = 0; i < score.size(); ++i) {
    score[i] = all_zero ? std::abs(static_cast<double>(w.data[i]))
                        : std::abs(static_cast<double>(w.data[i]) * static_cast<double>(dw.data[i]));
  }
  PruningMask m = mask_from_scores(layer, MaskGranularity::element, score, sparsity);
  return m;
}

PruningMask prune_splicing(const Tensor& w, double sparsity, double band,
                           const std::vector<std::uint8_t>* previous) {
  const i64 total = static_cast<i64>(w.data.size());
  const i64 target = prune_count(sparsity, total);
  std::vector<double> mag(w.data.size());
  for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(static_cast<double>(w.data[i]));

  // level threshold at the target count
  std::vector<i64> order(static_cast<size_t>(total));
  std::iota(order.begin(), order.end(), i64(0));
  std::stable_sort(order.begin(), order.end(), [&mag](i64 a, i64 b) { return mag[a] < mag[b]; });
  const double t_mid = target > 0 ? mag[static_cast<size_t>(order[static_cast<size_t>(target - 1)])]
                                  : -1.0;
  const double t_low = t_mid * (1.0 - band);
  const double t_high = t_mid * (1.0 + band);

  PruningMask m;
  m.granularity = MaskGranularity::element;
  m.keep.assign(w.data.size(), 1);
  for (i64 i = 0; i < total; ++i) {
    if (mag[static_cast<size_t>(i)] < t_low) m.keep[static_cast<size_t>(i)] = 0;
    else if (mag[static_cast<size_t>(i)] > t_high) m.keep[static_cast<size_t>(i)] = 1;
    else m.keep[static_cast<size_t>(i)] = previous ? (*previous)[static_cast<size_t>(i)] : 1;
  }

  // pin the exact count: grow or shrink inside the band in magnitude order
  i64 pruned = m.pruned();
  if (pruned < target) {
    for (i64 oi = 0; oi < total && pruned < target; ++oi) {
      const size_t i = static_cast<size_t>(order[static_cast<size_t>(oi)]);
      if (m.keep[i]) {
        m.keep[i] = 0;
        ++pruned;
      }
    }
  } else if (pruned > target) {
    for (i64 oi = total - 1; oi >= 0 && pruned > target; --oi) {
      const size_t i = static_cast<size_t>(order[static_cast<size_t>(oi)]);
      if (!m.keep[i]) {
        m.keep[i] = 1;
        --pruned;
      }
    }
  }
  return m;
}

namespace {

// Per-unit norms; filter = output rows, channel = input slices, row = fc rows.
std::vector<double> unit_norms(const Tensor& w, const LayerDescriptor& d, StructuredPattern p,
                               double exponent) {
  std::vector<double> norm;
  if (d.kind == LayerKind::conv) {
    require(p != StructuredPattern::row, "row pattern is fc-only");
    const i64 per_filter = i64(d.c_in) * d.k * d.k;
    const i64 per_channel = i64(d.k) * d.k;
    if (p == StructuredPattern::filter) {
      norm.assign(d.c_out, 0.0);
      for (int co = 0; co < d.c_out; ++co) {
        double s = 0;
        for (i64 i = 0; i < per_filter; ++i)
          s += std::pow(std::abs(static_cast<double>(w.data[co * per_filter + i])), exponent);
        norm[co] = s;
      }
    } else {
      norm.assign(d.c_in, 0.0);
      for (int ci = 0; ci < d.c_in; ++ci) {
        double s = 0;
        for (int co = 0; co < d.c_out; ++co)
          for (i64 i = 0; i < per_channel; ++i)
            s += std::pow(std::abs(static_cast<double>(
                     w.data[co * per_filter + ci * per_channel + i])),
                 exponent);
        norm[ci] = s;
      }
    }
  } else {
    require(p == StructuredPattern::row || p == StructuredPattern::channel,
            "fc layers admit row or channel patterns only");
    if (p == StructuredPattern::row) {
      norm.assign(d.n_out, 0.0);
      for (int n = 0; n < d.n_out; ++n) {
        double s = 0;
        for (int mcol = 0; mcol < d.m_in; ++mcol)
          s += std::pow(std::abs(static_cast<double>(w.data[i64(n) * d.m_in + mcol])), exponent);
        norm[n] = s;
      }
    } else {
      norm.assign(d.m_in, 0.0);
      for (int mcol = 0; mcol < d.m_in; ++mcol) {
        double s = 0;
        for (int n = 0; n < d.n_out; ++n)
          s += std::pow(std::abs(static_cast<double>(w.data[i64(n) * d.m_in + mcol])), exponent);
        norm[mcol] = s;
      }
    }
  }
  return norm;
}

PruningMask ranked_structured(const Tensor& w, const LayerDescriptor& d, double sparsity,
                              StructuredPattern p, double exponent) {
  if (d.kind == LayerKind::fc)
    require(p != StructuredPattern::filter, "ranked pruning: fc layer has no filters");
  auto norms = unit_norms(w, d, p, exponent);
  MaskGranularity g = (p == StructuredPattern::channel) ? MaskGranularity::channel
                                                        : MaskGranularity::filter;
  PruningMask m = mask_from_scores(d.index, g, norms, sparsity);
  return m;
}

}  // namespace

PruningMask prune_l1_ranked(const Tensor& w, const LayerDescriptor& d, double sparsity,
                            StructuredPattern pattern) {
  return ranked_structured(w, d, sparsity, pattern, 1.0);
}

PruningMask prune_l2_ranked(const Tensor& w, const LayerDescriptor& d, double sparsity,
                            StructuredPattern pattern) {
  return ranked_structured(w, d, sparsity, pattern, 2.0);
}

PruningMask prune_bernoulli(const LayerDescriptor& d, double sparsity, u64 seed) {
  const int units = d.output_units();
  const i64 n = prune_count(sparsity, units);
  PruningMask m;
  m.layer = d.index;
  m.granularity = MaskGranularity::filter;
  m.keep.assign(units, 1);
  Rng rng(seed);
  std::vector<int> idx(units);
  std::iota(idx.begin(), idx.end(), 0);
  for (i64 i = 0; i < n; ++i) {
    const int j = static_cast<int>(i) + rng.uniform_int(0, units - 1 - static_cast<int>(i));
    std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    m.keep[static_cast<size_t>(idx[static_cast<size_t>(i)])] = 0;
  }
  return m;
}

namespace {

// im2col patch matrix for one conv layer over the calibration batch.
// rows = sum over samples of h_out*w_out, cols = c_in*k*k (channel-major).
Mat im2col_batch(const LayerDescriptor& d, const std::vector<Tensor>& inputs) {
  const int ho = d.h_out(), wo = d.w_out();
  const int cols = d.c_in * d.k * d.k;
  Mat x(static_cast<int>(inputs.size()) * ho * wo, cols);
  int row = 0;
  for (const auto& in : inputs) {
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++row) {
        for (int ci = 0; ci < d.c_in; ++ci) {
          for (int ky = 0; ky < d.k; ++ky) {
            for (int kx = 0; kx < d.k; ++kx) {
              const int iy = oy * d.stride + ky - d.pad;
              const int ix = ox * d.stride + kx - d.pad;
              double v = 0.0;
              if (iy >= 0 && iy < d.h_in && ix >= 0 && ix < d.w_in)
                v = static_cast<double>(
                    in.data[(static_cast<size_t>(ci) * d.h_in + iy) * d.w_in + ix]);
              x.at(row, (ci * d.k + ky) * d.k + kx) = v;
            }
          }
        }
      }
    }
  }
  return x;
}

}  // namespace

FmReconstruction prune_fm_reconstruction(const ModelGraph& model,
                                         const std::vector<Tensor>& calib_inputs, int layer,
                                         double sparsity) {
  require(!calib_inputs.empty(), "fm reconstruction needs a calibration batch");
  const auto& d = model.layers[layer];
  FmReconstruction out;
  out.weights = model.weights[layer];
  out.mask.layer = layer;
  out.mask.granularity = MaskGranularity::channel;

  if (d.kind == LayerKind::fc) {
    // fc layers take the structured row mapping; reconstruction refit adds
    // nothing when whole output rows are removed
    out.mask = prune_l2_ranked(model.weights[layer], d, sparsity, StructuredPattern::row);
    return out;
  }

  const int c_in = d.c_in;
  out.mask.keep.assign(c_in, 1);
  const i64 n_drop = prune_count(sparsity, c_in);
  if (n_drop == 0) return out;

  // layer inputs on the calibration batch
  std::vector<Tensor> fed;
  fed.reserve(calib_inputs.size());
  for (const auto& s : calib_inputs) {
    ForwardTrace tr = model_forward_traced(model, s);
    fed.push_back(tr.fed[layer]);
  }

  const Mat x = im2col_batch(d, fed);
  const int kk = d.k * d.k;
  const int c_out = d.c_out;
  const i64 n_pos = x.rows;

  // per-channel contribution vectors v_c = X_c W_c^T, flattened (pos x c_out)
  std::vector<std::vector<double>> contrib(c_in);
  const Tensor& w = model.weights[layer];
  for (int ci = 0; ci < c_in; ++ci) {
    auto& v = contrib[ci];
    v.assign(static_cast<size_t>(n_pos) * c_out, 0.0);
    for (i64 r = 0; r < n_pos; ++r) {
      for (int co = 0; co < c_out; ++co) {
        double s = 0;
        for (int j = 0; j < kk; ++j)
          s += x.at(static_cast<int>(r), ci * kk + j) *
               static_cast<double>(w.data[(static_cast<size_t>(co) * c_in + ci) * kk + j]);
        v[static_cast<size_t>(r) * c_out + co] = s;
      }
    }
  }

  // channel-level Gram; the greedy score for a drop set is the residual
  // after optimally rescaling the surviving channel contributions
  std::vector<double> y(static_cast<size_t>(n_pos) * c_out, 0.0);
  for (int ci = 0; ci < c_in; ++ci)
    for (size_t i = 0; i < y.size(); ++i) y[i] += contrib[ci][i];
  Mat gram(c_in, c_in);
  std::vector<double> rhs(c_in);
  double y_norm2 = 0;
  for (double v : y) y_norm2 += v * v;
  for (int a = 0; a < c_in; ++a) {
    for (int b = a; b < c_in; ++b) {
      double s = 0;
      for (size_t i = 0; i < y.size(); ++i) s += contrib[a][i] * contrib[b][i];
      gram.at(a, b) = gram.at(b, a) = s;
    }
    double s = 0;
    for (size_t i = 0; i < y.size(); ++i) s += contrib[a][i] * y[i];
    rhs[a] = s;
  }

  auto subset_error = [&](const std::vector<int>& kept) {
    if (kept.empty()) return y_norm2;
    Mat g(static_cast<int>(kept.size()), static_cast<int>(kept.size()));
    Mat b(static_cast<int>(kept.size()), 1);
    for (size_t a = 0; a < kept.size(); ++a) {
      for (size_t c = 0; c < kept.size(); ++c) g.at(static_cast<int>(a), static_cast<int>(c)) = gram.at(kept[a], kept[c]);
      b.at(static_cast<int>(a), 0) = rhs[static_cast<size_t>(kept[a])];
    }
    Mat alpha = least_squares_solve_multi(g, b);
    double fit = 0;
    for (size_t a = 0; a < kept.size(); ++a) fit += alpha.at(static_cast<int>(a), 0) * b.at(static_cast<int>(a), 0);
    return std::max(0.0, y_norm2 - fit);
  };

  std::vector<int> kept_channels(c_in);
  std::iota(kept_channels.begin(), kept_channels.end(), 0);
  for (i64 step = 0; step < n_drop; ++step) {
    int best_pos = 0;
    double best_err = 0;
    bool first = true;
    for (size_t cand = 0; cand < kept_channels.size(); ++cand) {
      std::vector<int> trial = kept_channels;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(cand));
      const double err = subset_error(trial);
      if (first || err < best_err) {
        best_err = err;
        best_pos = static_cast<int>(cand);
        first = false;
      }
    }
    out.mask.keep[static_cast<size_t>(kept_channels[static_cast<size_t>(best_pos)])] = 0;
    kept_channels.erase(kept_channels.begin() + best_pos);
  }

  // single full least-squares refit of the surviving weights
  if (!kept_channels.empty()) {
    const int kept_cols = static_cast<int>(kept_channels.size()) * kk;
    Mat xk(static_cast<int>(n_pos), kept_cols);
    for (i64 r = 0; r < n_pos; ++r)
      for (size_t a = 0; a < kept_channels.size(); ++a)
        for (int j = 0; j < kk; ++j)
          xk.at(static_cast<int>(r), static_cast<int>(a) * kk + j) =
              x.at(static_cast<int>(r), kept_channels[a] * kk + j);
    Mat ym(static_cast<int>(n_pos), c_out);
    for (i64 r = 0; r < n_pos; ++r)
      for (int co = 0; co < c_out; ++co) ym.at(static_cast<int>(r), co) = y[static_cast<size_t>(r) * c_out + co];
    try {
      Mat refit = least_squares_solve_multi(xk, ym);
      Tensor neww(w.shape);
      for (int co = 0; co < c_out; ++co)
        for (size_t a = 0; a < kept_channels.size(); ++a)
          for (int j = 0; j < kk; ++j)
            neww.data[(static_cast<size_t>(co) * c_in + kept_channels[a]) * kk + j] =
                static_cast<real>(refit.at(static_cast<int>(a) * kk + j, co));
      out.weights = std::move(neww);
      out.refit_applied = true;
    } catch (const std::exception& e) {
      std::cerr << "warning: fm reconstruction refit failed at layer " << layer << " ("
                << e.what() << "); keeping original weights\n";
      out.weights = w;
      for (int ci = 0; ci < c_in; ++ci)
        if (!out.mask.keep[static_cast<size_t>(ci)])
          for (int co = 0; co < c_out; ++co)
            for (int j = 0; j < kk; ++j)
              out.weights.data[(static_cast<size_t>(co) * c_in + ci) * kk + j] = real(0);
    }
  } else {
    out.weights = Tensor(w.shape);  // everything dropped
  }

  // report the achieved reconstruction error on the batch
  double err = 0;
  {
    std::vector<int> kept;
    for (int ci = 0; ci < c_in; ++ci)
      if (out.mask.keep[static_cast<size_t>(ci)]) kept.push_back(ci);
    err = subset_error(kept);
  }
  out.reconstruction_error = err;
  return out;
}

// ---- quantization -------------------------------------------------------

double laplace_clip_multiplier(int bits) {
  require(bits >= 2 && bits <= 8, "bits out of [2,8]");
  static constexpr double kLambda[7] = {2.83, 3.89, 5.03, 6.20, 7.41, 8.64, 9.89};
  return kLambda[bits - 2];
}

QuantParams weight_quant_params(const Tensor& w, const LayerDescriptor& d, int bits,
                                const std::vector<std::uint8_t>* weight_keep) {
  require(bits >= 2 && bits <= 8, "bits out of [2,8]");
  const int units = d.output_units();
  const i64 per_unit = d.param_count() / units;
  QuantParams qp;
  qp.bits = bits;
  qp.scale.assign(units, 1.0);
  qp.offset.assign(units, 0.0);
  qp.zero_point.assign(units, 0);
  qp.degenerate.assign(units, 0);
  const double levels = static_cast<double>((1 << bits) - 1);
  for (int u = 0; u < units; ++u) {
    double lo = 0, hi = 0;
    bool any = false;
    for (i64 i = 0; i < per_unit; ++i) {
      const size_t idx = static_cast<size_t>(u) * per_unit + i;
      if (weight_keep && !(*weight_keep)[idx]) continue;
      const double v = static_cast<double>(w.data[idx]);
      if (!any) {
        lo = hi = v;
        any = true;
      } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!any || hi == lo) {
      qp.degenerate[u] = 1;
      qp.offset[u] = any ? lo : 0.0;
      continue;
    }
    qp.scale[u] = (hi - lo) / levels;
    qp.offset[u] = lo;
    const int zp = static_cast<int>(std::lround(-lo / qp.scale[u]));
    qp.zero_point[u] = std::clamp(zp, 0, (1 << bits) - 1);
  }
  return qp;
}

void fake_quantize_weights(Tensor& w, const LayerDescriptor& d, const QuantParams& qp,
                           const std::vector<std::uint8_t>* weight_keep) {
  const int units = d.output_units();
  const i64 per_unit = d.param_count() / units;
  const double qmax = static_cast<double>((1 << qp.bits) - 1);
  for (int u = 0; u < units; ++u) {
    if (qp.degenerate[u]) continue;
    const double scale = qp.scale[u], offset = qp.offset[u];
    for (i64 i = 0; i < per_unit; ++i) {
      const size_t idx = static_cast<size_t>(u) * per_unit + i;
      if (weight_keep && !(*weight_keep)[idx]) continue;  // pruned zeros stay exact
      const double v = static_cast<double>(w.data[idx]);
      double q = std::lround((v - offset) / scale);
      q = std::clamp(q, 0.0, qmax);
      w.data[idx] = static_cast<real>(offset + q * scale);
    }
  }
}

ActQuantParams activation_quant_params(const std::vector<const Tensor*>& calib_activations,
                                       int bits) {
  require(!calib_activations.empty(), "activation calibration: empty batch");
  ActQuantParams qp;
  qp.bits = bits;
  double sum = 0;
  i64 n = 0;
  for (const Tensor* t : calib_activations) {
    for (real v : t->data) sum += static_cast<double>(v);
    n += t->numel();
  }
  qp.mean = sum / static_cast<double>(n);
  double dev = 0;
  for (const Tensor* t : calib_activations)
    for (real v : t->data) dev += std::abs(static_cast<double>(v) - qp.mean);
  qp.laplace_b = dev / static_cast<double>(n);
  if (qp.laplace_b <= 0.0) {
    qp.enabled = false;  // constant activations: nothing to quantize
    return qp;
  }
  qp.clip = laplace_clip_multiplier(bits) * qp.laplace_b;
  qp.offset = qp.mean - qp.clip;
  qp.scale = 2.0 * qp.clip / static_cast<double>((1 << bits) - 1);
  qp.enabled = true;
  return qp;
}

real fake_quantize_value(real x, const ActQuantParams& qp) {
  if (!qp.enabled) return x;
  double v = static_cast<double>(x);
  v = std::clamp(v, qp.offset, qp.mean + qp.clip);
  double q = std::lround((v - qp.offset) / qp.scale);
  return static_cast<real>(qp.offset + q * qp.scale);
}

void fake_quantize_activations(Tensor& x, const ActQuantParams& qp) {
  if (!qp.enabled) return;
  for (real& v : x.data) v = fake_quantize_value(v, qp);
}

// ---- plan resolution and application -------------------------------------

CompressionPlan resolve_dependencies(const ModelGraph& model, CompressionPlan plan) {
  require(static_cast<int>(plan.actions.size()) == model.layer_count(),
          "plan does not cover all layers");
  for (int t = 0; t < model.layer_count(); ++t)
    require(plan.actions[static_cast<size_t>(t)].layer == t, "plan actions out of order");
  plan.filter_links.clear();
  for (const auto& j : model.junctions) {
    const int q = j.consumer - 1;  // last layer of the block
    const int p = j.producer;      // shortcut side
    const auto& act = plan.actions[static_cast<size_t>(q)];
    const bool filter_mask = technique_is_coarse(act.technique) &&
                             act.technique != Technique::fm_reconstruction &&
                             model.layers[static_cast<size_t>(q)].kind == LayerKind::conv;
    if (filter_mask && act.sparsity > 0.0) plan.filter_links.push_back({q, p});
  }
  plan.resolved = true;
  return plan;
}

namespace {

void expand_unit_mask(const LayerDescriptor& d, const std::vector<std::uint8_t>& unit_keep,
                      bool output_side, std::vector<std::uint8_t>& weight_keep) {
  const i64 total = d.param_count();
  if (static_cast<i64>(weight_keep.size()) != total) weight_keep.assign(total, 1);
  if (d.kind == LayerKind::conv) {
    const i64 per_filter = i64(d.c_in) * d.k * d.k;
    const i64 per_channel = i64(d.k) * d.k;
    if (output_side) {
      for (int co = 0; co < d.c_out; ++co)
        if (!unit_keep[static_cast<size_t>(co)])
          for (i64 i = 0; i < per_filter; ++i) weight_keep[co * per_filter + i] = 0;
    } else {
      for (int co = 0; co < d.c_out; ++co)
        for (int ci = 0; ci < d.c_in; ++ci)
          if (!unit_keep[static_cast<size_t>(ci)])
            for (i64 i = 0; i < per_channel; ++i)
              weight_keep[co * per_filter + ci * per_channel + i] = 0;
    }
  } else {
    if (output_side) {
      for (int n = 0; n < d.n_out; ++n)
        if (!unit_keep[static_cast<size_t>(n)])
          for (int mcol = 0; mcol < d.m_in; ++mcol) weight_keep[i64(n) * d.m_in + mcol] = 0;
    } else {
      for (int n = 0; n < d.n_out; ++n)
        for (int mcol = 0; mcol < d.m_in; ++mcol)
          if (!unit_keep[static_cast<size_t>(mcol)]) weight_keep[i64(n) * d.m_in + mcol] = 0;
    }
  }
}

void apply_layer_mask(ModelGraph& g, int t, const LayerCompression& lc) {
  Tensor& w = g.weights[t];
  for (size_t i = 0; i < lc.weight_keep.size(); ++i)
    if (!lc.weight_keep[i]) w.data[i] = real(0);
  // a removed output unit takes its bias with it
  for (size_t u = 0; u < lc.out_keep.size(); ++u)
    if (!lc.out_keep[u]) g.biases[t].data[u] = real(0);
}

}  // namespace

InputHook CompressedModel::act_hook() const {
  return [this](int layer, Tensor& x) {
    fake_quantize_activations(x, act_quant[static_cast<size_t>(layer)]);
  };
}

double CompressedModel::out_survival(int layer) const {
  const auto& keep = layers[static_cast<size_t>(layer)].out_keep;
  if (keep.empty()) return 1.0;
  i64 alive = 0;
  for (auto k : keep) alive += k ? 1 : 0;
  return static_cast<double>(alive) / static_cast<double>(keep.size());
}

CompressedModel apply_plan(const ModelGraph& model, const CompressionPlan& plan,
                           const std::vector<Tensor>& calib_inputs,
                           const std::vector<int>& calib_labels, const ApplyOptions& opts) {
  require(plan.resolved, "apply_plan: run resolve_dependencies first");
  require(static_cast<int>(plan.actions.size()) == model.layer_count(),
          "apply_plan: plan does not cover all layers");
  CompressedModel cm;
  cm.graph = model;
  const int L = model.layer_count();
  cm.layers.resize(static_cast<size_t>(L));

  for (int t = 0; t < L; ++t) {
    const auto& a = plan.actions[static_cast<size_t>(t)];
    const auto& d = model.layers[static_cast<size_t>(t)];
    auto& lc = cm.layers[static_cast<size_t>(t)];
    lc.bits = a.bits;
    lc.coarse = technique_is_coarse(a.technique);
    lc.weight_keep.assign(static_cast<size_t>(d.param_count()), 1);
    lc.out_keep.assign(static_cast<size_t>(d.output_units()), 1);
    lc.in_keep.assign(static_cast<size_t>(d.input_units()), 1);

    switch (a.technique) {
      case Technique::level: {
        auto m = prune_level(cm.graph.weights[static_cast<size_t>(t)], a.sparsity);
        lc.weight_keep = m.keep;
        break;
      }
      case Technique::splicing: {
        auto m = prune_splicing(cm.graph.weights[static_cast<size_t>(t)], a.sparsity);
        lc.weight_keep = m.keep;
        break;
      }
      case Technique::sensitivity: {
        auto m = prune_sensitivity(cm.graph, calib_inputs, calib_labels, t, a.sparsity);
        lc.weight_keep = m.keep;
        break;
      }
      case Technique::l1_ranked:
      case Technique::l2_ranked: {
        const auto pattern =
            d.kind == LayerKind::conv ? StructuredPattern::filter : StructuredPattern::row;
        auto m = a.technique == Technique::l1_ranked
                     ? prune_l1_ranked(cm.graph.weights[static_cast<size_t>(t)], d, a.sparsity, pattern)
                     : prune_l2_ranked(cm.graph.weights[static_cast<size_t>(t)], d, a.sparsity, pattern);
        lc.out_keep = m.keep;
        expand_unit_mask(d, m.keep, true, lc.weight_keep);
        break;
      }
      case Technique::bernoulli: {
        auto m = prune_bernoulli(d, a.sparsity, Rng::derive(opts.seed, static_cast<u64>(t)));
        lc.out_keep = m.keep;
        expand_unit_mask(d, m.keep, true, lc.weight_keep);
        break;
      }
      case Technique::fm_reconstruction: {
        auto r = prune_fm_reconstruction(cm.graph, calib_inputs, t, a.sparsity);
        if (d.kind == LayerKind::fc && r.mask.granularity != MaskGranularity::channel) {
          lc.out_keep = r.mask.keep;
          expand_unit_mask(d, r.mask.keep, true, lc.weight_keep);
        } else {
          lc.in_keep = r.mask.keep;
          cm.graph.weights[static_cast<size_t>(t)] = r.weights;
          expand_unit_mask(d, r.mask.keep, false, lc.weight_keep);
        }
        break;
      }
    }
    apply_layer_mask(cm.graph, t, lc);
  }

  // junction-imposed identical filter masks on the shortcut side
  for (const auto& link : plan.filter_links) {
    const auto& src = cm.layers[static_cast<size_t>(link.src)];
    auto& dst = cm.layers[static_cast<size_t>(link.dst)];
    require(src.out_keep.size() == dst.out_keep.size(),
            "apply_plan: irreconcilable junction masks");
    dst.out_keep = src.out_keep;
    expand_unit_mask(model.layers[static_cast<size_t>(link.dst)], dst.out_keep, true,
                     dst.weight_keep);
    apply_layer_mask(cm.graph, link.dst, dst);
  }

  for (int t = 0; t < L; ++t) {
    auto& lc = cm.layers[static_cast<size_t>(t)];
    i64 kept = 0;
    for (auto k : lc.weight_keep) kept += k ? 1 : 0;
    lc.achieved_sparsity =
        1.0 - static_cast<double>(kept) / static_cast<double>(lc.weight_keep.size());
  }

  cm.weight_quant.resize(static_cast<size_t>(L));
  cm.act_quant.resize(static_cast<size_t>(L));
  if (opts.quantize) {
    for (int t = 0; t < L; ++t) {
      const auto& d = model.layers[static_cast<size_t>(t)];
      auto& lc = cm.layers[static_cast<size_t>(t)];
      cm.weight_quant[static_cast<size_t>(t)] =
          weight_quant_params(cm.graph.weights[static_cast<size_t>(t)], d, lc.bits, &lc.weight_keep);
      fake_quantize_weights(cm.graph.weights[static_cast<size_t>(t)], d,
                            cm.weight_quant[static_cast<size_t>(t)], &lc.weight_keep);
    }
    // calibrate activation clipping on the pruned + weight-quantized model
    require(!calib_inputs.empty(), "apply_plan: quantization needs a calibration batch");
    std::vector<std::vector<Tensor>> fed(static_cast<size_t>(L));
    for (const auto& s : calib_inputs) {
      ForwardTrace tr = model_forward_traced(cm.graph, s);
      for (int t = 0; t < L; ++t) fed[static_cast<size_t>(t)].push_back(std::move(tr.fed[static_cast<size_t>(t)]));
    }
    for (int t = 0; t < L; ++t) {
      std::vector<const Tensor*> ptrs;
      ptrs.reserve(fed[static_cast<size_t>(t)].size());
      for (const auto& a : fed[static_cast<size_t>(t)]) ptrs.push_back(&a);
      cm.act_quant[static_cast<size_t>(t)] =
          activation_quant_params(ptrs, cm.layers[static_cast<size_t>(t)].bits);
    }
  }
  return cm;
}

std::pair<double, int> map_actions(double a_s, double a_q, double s_cap) {
  require(a_s >= 0.0 && a_s <= 1.0 && a_q >= 0.0 && a_q <= 1.0, "map_actions: inputs in [0,1]");
  const double s = a_s * s_cap;
  const int q = std::clamp(static_cast<int>(std::lround(2.0 + 6.0 * a_q)), 2, 8);
  return {s, q};
}

Technique technique_from_unit(double gene) {
  int idx = static_cast<int>(std::floor(gene * kTechniqueCount));
  idx = std::clamp(idx, 0, kTechniqueCount - 1);
  return static_cast<Technique>(idx);
}

std::string plan_to_json(const CompressionPlan& plan) {
  json arr = json::array();
  for (const auto& a : plan.actions) {
    arr.push_back({{"layer", a.layer},
                   {"technique", technique_name(a.technique)},
                   {"sparsity", a.sparsity},
                   {"bits", a.bits}});
  }
  return arr.dump(2) + "\n";
}

CompressionPlan plan_from_json(const std::string& text) {
  json arr = json::parse(text);
  require(arr.is_array(), "plan json: expected an array");
  CompressionPlan plan;
  for (const auto& e : arr) {
    CompressionAction a;
    a.layer = e.at("layer").get<int>();
    a.technique = technique_from_name(e.at("technique").get<std::string>());
    a.sparsity = e.at("sparsity").get<double>();
    a.bits = e.at("bits").get<int>();
    require(a.sparsity >= 0.0 && a.sparsity <= 1.0, "plan json: sparsity out of range");
    require(a.bits >= 2 && a.bits <= 8, "plan json: bits out of range");
    plan.actions.push_back(a);
  }
  std::sort(plan.actions.begin(), plan.actions.end(),
            [](const CompressionAction& x, const CompressionAction& y) { return x.layer < y.layer; });
  return plan;
}

}  // namespace cforge
