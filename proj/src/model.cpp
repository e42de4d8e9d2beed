#include "cforge/model.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

namespace {

// Shape of the post-activation output of layer t.
std::vector<int> out_shape(const LayerDescriptor& d) {
  return d.kind == LayerKind::conv ? std::vector<int>{d.c_out, d.h_out(), d.w_out()}
                                   : std::vector<int>{d.n_out};
}

Tensor transition_to_fc(const Tensor& x, const LayerDescriptor& fc, FcTransition mode) {
  if (static_cast<int>(x.shape.size()) == 1) return x;  // already a vector
  require(x.shape.size() == 3, "fc transition: expected CHW input");
  const int c = x.shape[0], h = x.shape[1], w = x.shape[2];
  if (mode == FcTransition::flatten) {
    require(fc.m_in == c * h * w, "fc transition: flatten size mismatch");
    Tensor v({c * h * w});
    v.data = x.data;
    return v;
  }
  require(fc.m_in == c, "fc transition: pooled size mismatch");
  Tensor v({c});
  const real inv = real(1) / real(h * w);
  for (int ci = 0; ci < c; ++ci) {
    real acc = 0;
    const real* p = x.data.data() + static_cast<size_t>(ci) * h * w;
    for (int i = 0; i < h * w; ++i) acc += p[i];
    v[ci] = acc * inv;
  }
  return v;
}

}  // namespace

void ModelGraph::validate() const {
  require(!layers.empty(), "model: no layers");
  require(weights.size() == layers.size() && biases.size() == layers.size(),
          "model: weight/bias count mismatch");
  bool seen_fc = false;
  for (int t = 0; t < layer_count(); ++t) {
    const auto& d = layers[t];
    require(d.index == t, "model: layer index out of order");
    require(weights[t].shape == d.weight_shape(), "model: weight shape mismatch at layer " +
                                                      std::to_string(t));
    if (d.kind == LayerKind::fc) seen_fc = true;
    else require(!seen_fc, "model: conv layer after fc layer");
  }
  for (const auto& j : junctions) {
    require(j.producer >= 0 && j.consumer <= layer_count() && j.producer < j.consumer - 1,
            "model: junction edge out of range");
    const auto a = out_shape(layers[j.producer]);
    const auto b = out_shape(layers[j.consumer - 1]);
    require(a == b, "model: junction joins tensors of different shape");
  }
  require(head_classes == layers.back().output_units(), "model: head size mismatch");
}

Tensor conv2d_forward(const Tensor& input, const LayerDescriptor& layer, const Tensor& w,
                      const Tensor& b) {
  require(layer.kind == LayerKind::conv, "conv2d: not a conv layer");
  require(layer.stride >= 1, "conv2d: stride must be >= 1");
  require(input.shape == std::vector<int>({layer.c_in, layer.h_in, layer.w_in}),
          "conv2d: input shape mismatch at layer " + std::to_string(layer.index));
  require(w.shape == layer.weight_shape(), "conv2d: weight shape mismatch");

  const int ho = layer.h_out(), wo = layer.w_out();
  require(ho > 0 && wo > 0, "conv2d: empty output");
  Tensor out({layer.c_out, ho, wo});

  const int hi = layer.h_in, wi = layer.w_in, kk = layer.k, str = layer.stride, pad = layer.pad;
  for (int co = 0; co < layer.c_out; ++co) {
    real* o = out.data.data() + static_cast<size_t>(co) * ho * wo;
    const real bias = b.numel() ? b[co] : real(0);
    for (int i = 0; i < ho * wo; ++i) o[i] = bias;
    for (int ci = 0; ci < layer.c_in; ++ci) {
      const real* xin = input.data.data() + static_cast<size_t>(ci) * hi * wi;
      const real* wrow = w.data.data() + ((static_cast<size_t>(co) * layer.c_in + ci) * kk) * kk;
      for (int ky = 0; ky < kk; ++ky) {
        for (int kx = 0; kx < kk; ++kx) {
          const real wv = wrow[ky * kk + kx];
          if (wv == real(0)) continue;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * str + ky - pad;
            if (iy < 0 || iy >= hi) continue;
            const real* xr = xin + static_cast<size_t>(iy) * wi;
            real* orow = o + static_cast<size_t>(oy) * wo;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * str + kx - pad;
              if (ix < 0 || ix >= wi) continue;
              orow[ox] += wv * xr[ix];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor fc_forward(const Tensor& input, const LayerDescriptor& layer, const Tensor& w,
                  const Tensor& b) {
  require(layer.kind == LayerKind::fc, "fc: not an fc layer");
  require(input.numel() == layer.m_in,
          "fc: input length mismatch at layer " + std::to_string(layer.index));
  Tensor out({layer.n_out});
  for (int n = 0; n < layer.n_out; ++n) {
    const real* wr = w.data.data() + static_cast<size_t>(n) * layer.m_in;
    real acc = b.numel() ? b[n] : real(0);
    for (int m = 0; m < layer.m_in; ++m) acc += wr[m] * input[m];
    out[n] = acc;
  }
  return out;
}

namespace {

// Shared forward loop. When `trace` is non-null, per-layer fed inputs and
// post-activation outputs are recorded for the backward pass.
Tensor run_forward(const ModelGraph& model, const Tensor& input, const InputHook& hook,
                   ForwardTrace* trace) {
  const int L = model.layer_count();
  std::vector<Tensor> outs(L);
  Tensor logits;
  for (int t = 0; t < L; ++t) {
    const auto& d = model.layers[t];
    Tensor x = (t == 0) ? input : outs[t - 1];
    if (d.kind == LayerKind::fc) x = transition_to_fc(x, d, model.transition);
    if (hook) hook(t, x);
    if (trace) trace->fed[t] = x;

    Tensor z = d.kind == LayerKind::conv ? conv2d_forward(x, d, model.weights[t], model.biases[t])
                                         : fc_forward(x, d, model.weights[t], model.biases[t]);
    for (const auto& j : model.junctions) {
      if (j.consumer == t + 1) {
        require(z.same_shape(outs[j.producer]), "model: junction shape mismatch in forward");
        for (i64 i = 0; i < z.numel(); ++i) z[i] += outs[j.producer][i];
      }
    }
    if (t == L - 1) {
      logits = z;
      if (trace) trace->out[t] = z;
    } else {
      for (real& v : z.data) v = v > real(0) ? v : real(0);
      outs[t] = std::move(z);
      if (trace) trace->out[t] = outs[t];
    }
  }
  return logits;
}

}  // namespace

Tensor model_forward(const ModelGraph& model, const Tensor& input, const InputHook& hook) {
  return run_forward(model, input, hook, nullptr);
}

ForwardTrace model_forward_traced(const ModelGraph& model, const Tensor& input) {
  ForwardTrace tr;
  const int L = model.layer_count();
  tr.fed.resize(L);
  tr.out.resize(L);
  tr.logits = run_forward(model, input, nullptr, &tr);
  return tr;
}

namespace {

void conv2d_backward(const LayerDescriptor& d, const Tensor& x, const Tensor& w, const Tensor& gz,
                     Tensor& dw, Tensor& db, Tensor& gx) {
  const int hi = d.h_in, wi = d.w_in, kk = d.k, str = d.stride, pad = d.pad;
  const int ho = d.h_out(), wo = d.w_out();
  for (int co = 0; co < d.c_out; ++co) {
    const real* g = gz.data.data() + static_cast<size_t>(co) * ho * wo;
    real acc_b = 0;
    for (int i = 0; i < ho * wo; ++i) acc_b += g[i];
    db[co] += acc_b;
    for (int ci = 0; ci < d.c_in; ++ci) {
      const real* xin = x.data.data() + static_cast<size_t>(ci) * hi * wi;
      real* gxin = gx.data.data() + static_cast<size_t>(ci) * hi * wi;
      const size_t wbase = ((static_cast<size_t>(co) * d.c_in + ci) * kk) * kk;
      for (int ky = 0; ky < kk; ++ky) {
        for (int kx = 0; kx < kk; ++kx) {
          const real wv = w.data[wbase + ky * kk + kx];
          real acc_w = 0;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * str + ky - pad;
            if (iy < 0 || iy >= hi) continue;
            const real* xr = xin + static_cast<size_t>(iy) * wi;
            real* gxr = gxin + static_cast<size_t>(iy) * wi;
            const real* gr = g + static_cast<size_t>(oy) * wo;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * str + kx - pad;
              if (ix < 0 || ix >= wi) continue;
              acc_w += gr[ox] * xr[ix];
              gxr[ix] += gr[ox] * wv;
            }
          }
          dw[wbase + ky * kk + kx] += acc_w;
        }
      }
    }
  }
}

void fc_backward(const LayerDescriptor& d, const Tensor& x, const Tensor& w, const Tensor& gz,
                 Tensor& dw, Tensor& db, Tensor& gx) {
  for (int n = 0; n < d.n_out; ++n) {
    const real g = gz[n];
    db[n] += g;
    real* dwr = dw.data.data() + static_cast<size_t>(n) * d.m_in;
    const real* wr = w.data.data() + static_cast<size_t>(n) * d.m_in;
    for (int m = 0; m < d.m_in; ++m) {
      dwr[m] += g * x[m];
      gx[m] += g * wr[m];
    }
  }
}

// Undo the conv->fc transition: spread a gradient over the fc input back to
// the producing feature-map shape.
Tensor transition_backward(const Tensor& g, const std::vector<int>& chw, FcTransition mode) {
  Tensor out(chw);
  const int c = chw[0], h = chw[1], w = chw[2];
  if (mode == FcTransition::flatten) {
    out.data.assign(g.data.begin(), g.data.end());
  } else {
    const real inv = real(1) / real(h * w);
    for (int ci = 0; ci < c; ++ci)
      for (int i = 0; i < h * w; ++i) out.data[static_cast<size_t>(ci) * h * w + i] = g[ci] * inv;
  }
  return out;
}

}  // namespace

LayerGradients loss_gradients(const ModelGraph& model, const std::vector<Tensor>& inputs,
                              const std::vector<int>& labels, double* loss_out) {
  require(!inputs.empty() && inputs.size() == labels.size(), "loss_gradients: empty batch");
  const int L = model.layer_count();
  LayerGradients g;
  g.dw.reserve(L);
  g.db.reserve(L);
  for (int t = 0; t < L; ++t) {
    g.dw.emplace_back(model.layers[t].weight_shape());
    g.db.emplace_back(std::vector<int>{model.layers[t].output_units()});
  }

  double total_loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(inputs.size());

  for (size_t s = 0; s < inputs.size(); ++s) {
    ForwardTrace tr = model_forward_traced(model, inputs[s]);

    // softmax cross-entropy gradient wrt logits
    const Tensor& z = tr.logits;
    double zmax = -1e300;
    for (real v : z.data) zmax = std::max(zmax, static_cast<double>(v));
    double denom = 0.0;
    for (real v : z.data) denom += std::exp(static_cast<double>(v) - zmax);
    Tensor grad({static_cast<int>(z.numel())});
    for (i64 i = 0; i < z.numel(); ++i) {
      const double p = std::exp(static_cast<double>(z[i]) - zmax) / denom;
      grad[i] = static_cast<real>((p - (i == labels[s] ? 1.0 : 0.0)) * inv_batch);
    }
    const double p_label =
        std::exp(static_cast<double>(z[labels[s]]) - zmax) / denom;
    total_loss += -std::log(std::max(p_label, 1e-300)) * inv_batch;

    // per-layer gradient wrt the post-activation output
    std::vector<Tensor> gout(L);
    gout[L - 1] = std::move(grad);
    for (int t = L - 1; t >= 0; --t) {
      const auto& d = model.layers[t];
      Tensor gz = std::move(gout[t]);
      if (t != L - 1) {
        // ReLU mask from the recorded post-activation values
        for (i64 i = 0; i < gz.numel(); ++i)
          if (tr.out[t][i] <= real(0)) gz[i] = real(0);
      }
      for (const auto& j : model.junctions) {
        if (j.consumer == t + 1) {
          Tensor& dst = gout[j.producer];
          if (dst.numel() == 0) dst = Tensor(tr.out[j.producer].shape);
          for (i64 i = 0; i < gz.numel(); ++i) dst[i] += gz[i];
        }
      }
      Tensor gx(tr.fed[t].shape);
      if (d.kind == LayerKind::conv)
        conv2d_backward(d, tr.fed[t], model.weights[t], gz, g.dw[t], g.db[t], gx);
      else
        fc_backward(d, tr.fed[t], model.weights[t], gz, g.dw[t], g.db[t], gx);

      if (t > 0) {
        const auto& prev_shape = tr.out[t - 1].shape;
        Tensor gprev = (gx.shape == prev_shape)
                           ? std::move(gx)
                           : transition_backward(gx, prev_shape, model.transition);
        if (gout[t - 1].numel() == 0) gout[t - 1] = std::move(gprev);
        else
          for (i64 i = 0; i < gprev.numel(); ++i) gout[t - 1][i] += gprev[i];
      }
    }
  }

  if (loss_out) *loss_out = total_loss;
  return g;
}

}  // namespace cforge
