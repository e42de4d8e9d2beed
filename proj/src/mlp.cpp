#include "cforge/mlp.hpp"

#include <cmath>

namespace cforge {

namespace {

real act_apply(Act a, real z) {
  switch (a) {
    case Act::relu: return z > real(0) ? z : real(0);
    case Act::tanh_act: return static_cast<real>(std::tanh(static_cast<double>(z)));
    case Act::sigmoid: return static_cast<real>(1.0 / (1.0 + std::exp(-static_cast<double>(z))));
    default: return z;
  }
}

// derivative expressed through the activation output
real act_deriv(Act a, real y) {
  switch (a) {
    case Act::relu: return y > real(0) ? real(1) : real(0);
    case Act::tanh_act: return real(1) - y * y;
    case Act::sigmoid: return y * (real(1) - y);
    default: return real(1);
  }
}

real noise_shape(double x) {
  return static_cast<real>((x < 0 ? -1.0 : 1.0) * std::sqrt(std::abs(x)));
}

}  // namespace

Mlp::Mlp(std::vector<MlpLayerSpec> specs, Rng& rng) {
  require(!specs.empty(), "mlp: empty spec");
  for (size_t i = 1; i < specs.size(); ++i)
    require(specs[i].in == specs[i - 1].out, "mlp: layer width mismatch");
  for (const auto& sp : specs) {
    Layer l;
    l.spec = sp;
    const double bound = 1.0 / std::sqrt(static_cast<double>(sp.in));
    l.w.resize(static_cast<size_t>(sp.out) * sp.in);
    l.b.assign(sp.out, real(0));
    for (auto& v : l.w) v = static_cast<real>(rng.uniform(-bound, bound));
    for (auto& v : l.b) v = static_cast<real>(rng.uniform(-bound, bound));
    if (sp.noisy) {
      l.w_sigma.assign(l.w.size(), static_cast<real>(0.5 * bound));
      l.b_sigma.assign(l.b.size(), static_cast<real>(0.5 * bound));
      l.eps_in.assign(sp.in, real(0));
      l.eps_out.assign(sp.out, real(0));
    }
    layers_.push_back(std::move(l));
  }
}

std::vector<real> Mlp::forward_partial(const std::vector<real>& in, int n_layers) const {
  require(n_layers >= 1 && n_layers <= layer_count(), "mlp: bad partial depth");
  std::vector<real> x = in;
  for (int li = 0; li < n_layers; ++li) {
    const auto& l = layers_[li];
    require(static_cast<int>(x.size()) == l.spec.in, "mlp: input width mismatch");
    std::vector<real> y(l.spec.out);
    for (int o = 0; o < l.spec.out; ++o) {
      const real* wr = l.w.data() + static_cast<size_t>(o) * l.spec.in;
      real acc = l.b[o];
      if (l.spec.noisy) {
        const real eo = l.eps_out[o];
        acc += l.b_sigma[o] * eo;
        const real* sr = l.w_sigma.data() + static_cast<size_t>(o) * l.spec.in;
        for (int i = 0; i < l.spec.in; ++i)
          acc += (wr[i] + sr[i] * eo * l.eps_in[i]) * x[i];
      } else {
        for (int i = 0; i < l.spec.in; ++i) acc += wr[i] * x[i];
      }
      y[o] = act_apply(l.spec.act, acc);
    }
    x = std::move(y);
  }
  return x;
}

std::vector<real> Mlp::forward(const std::vector<real>& in) const {
  return forward_partial(in, layer_count());
}

std::vector<real> Mlp::forward_traced(const std::vector<real>& in, Trace& tr) const {
  tr.x.assign(layer_count(), {});
  tr.y.assign(layer_count(), {});
  std::vector<real> x = in;
  for (int li = 0; li < layer_count(); ++li) {
    tr.x[li] = x;
    x = [&] {
      // reuse the single-layer path
      const auto& l = layers_[li];
      std::vector<real> y(l.spec.out);
      for (int o = 0; o < l.spec.out; ++o) {
        const real* wr = l.w.data() + static_cast<size_t>(o) * l.spec.in;
        real acc = l.b[o];
        if (l.spec.noisy) {
          const real eo = l.eps_out[o];
          acc += l.b_sigma[o] * eo;
          const real* sr = l.w_sigma.data() + static_cast<size_t>(o) * l.spec.in;
          for (int i = 0; i < l.spec.in; ++i)
            acc += (wr[i] + sr[i] * eo * l.eps_in[i]) * tr.x[li][i];
        } else {
          for (int i = 0; i < l.spec.in; ++i) acc += wr[i] * tr.x[li][i];
        }
        y[o] = act_apply(l.spec.act, acc);
      }
      return y;
    }();
    tr.y[li] = x;
  }
  return x;
}

Mlp::Grads Mlp::zero_grads() const {
  Grads g;
  for (const auto& l : layers_) {
    g.w.emplace_back(l.w.size(), real(0));
    g.b.emplace_back(l.b.size(), real(0));
    g.w_sigma.emplace_back(l.w_sigma.size(), real(0));
    g.b_sigma.emplace_back(l.b_sigma.size(), real(0));
  }
  g.input.assign(input_dim(), real(0));
  return g;
}

void Mlp::Grads::add_scaled(const Grads& o, real s) {
  auto axpy = [s](std::vector<std::vector<real>>& dst, const std::vector<std::vector<real>>& src) {
    for (size_t i = 0; i < dst.size(); ++i)
      for (size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += s * src[i][j];
  };
  axpy(w, o.w);
  axpy(b, o.b);
  axpy(w_sigma, o.w_sigma);
  axpy(b_sigma, o.b_sigma);
  for (size_t j = 0; j < input.size(); ++j) input[j] += s * o.input[j];
}

void Mlp::backward(const Trace& tr, const std::vector<real>& dy, Grads& g) const {
  std::vector<real> grad = dy;
  for (int li = layer_count() - 1; li >= 0; --li) {
    const auto& l = layers_[li];
    std::vector<real> gz(l.spec.out);
    for (int o = 0; o < l.spec.out; ++o) gz[o] = grad[o] * act_deriv(l.spec.act, tr.y[li][o]);
    std::vector<real> gx(l.spec.in, real(0));
    for (int o = 0; o < l.spec.out; ++o) {
      const real go = gz[o];
      if (go == real(0)) continue;
      const size_t row = static_cast<size_t>(o) * l.spec.in;
      g.b[li][o] += go;
      if (l.spec.noisy) {
        const real eo = l.eps_out[o];
        g.b_sigma[li][o] += go * eo;
        for (int i = 0; i < l.spec.in; ++i) {
          const real xi = tr.x[li][i];
          g.w[li][row + i] += go * xi;
          g.w_sigma[li][row + i] += go * xi * eo * l.eps_in[i];
          gx[i] += go * (l.w[row + i] + l.w_sigma[row + i] * eo * l.eps_in[i]);
        }
      } else {
        for (int i = 0; i < l.spec.in; ++i) {
          g.w[li][row + i] += go * tr.x[li][i];
          gx[i] += go * l.w[row + i];
        }
      }
    }
    grad = std::move(gx);
  }
  for (size_t i = 0; i < g.input.size(); ++i) g.input[i] += grad[i];
}

void Mlp::resample_noise(Rng& rng) {
  for (auto& l : layers_) {
    if (!l.spec.noisy) continue;
    for (auto& e : l.eps_in) e = noise_shape(rng.normal(0.0, 1.0));
    for (auto& e : l.eps_out) e = noise_shape(rng.normal(0.0, 1.0));
  }
}

void Mlp::zero_noise() {
  for (auto& l : layers_) {
    if (!l.spec.noisy) continue;
    std::fill(l.eps_in.begin(), l.eps_in.end(), real(0));
    std::fill(l.eps_out.begin(), l.eps_out.end(), real(0));
  }
}

std::vector<real> Mlp::params_flat() const {
  std::vector<real> flat;
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.w.begin(), l.w.end());
    flat.insert(flat.end(), l.b.begin(), l.b.end());
    flat.insert(flat.end(), l.w_sigma.begin(), l.w_sigma.end());
    flat.insert(flat.end(), l.b_sigma.begin(), l.b_sigma.end());
  }
  return flat;
}

void Mlp::set_params_flat(const std::vector<real>& flat) {
  size_t off = 0;
  auto take = [&](std::vector<real>& dst) {
    require(off + dst.size() <= flat.size(), "mlp: parameter blob too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(off),
              flat.begin() + static_cast<std::ptrdiff_t>(off + dst.size()), dst.begin());
    off += dst.size();
  };
  for (auto& l : layers_) {
    take(l.w);
    take(l.b);
    take(l.w_sigma);
    take(l.b_sigma);
  }
  require(off == flat.size(), "mlp: parameter blob too long");
}

void Mlp::copy_from(const Mlp& other) {
  require(layer_count() == other.layer_count(), "mlp: copy shape mismatch");
  for (int i = 0; i < layer_count(); ++i) {
    layers_[i].w = other.layers_[i].w;
    layers_[i].b = other.layers_[i].b;
    layers_[i].w_sigma = other.layers_[i].w_sigma;
    layers_[i].b_sigma = other.layers_[i].b_sigma;
  }
}

void Mlp::polyak_from(const Mlp& online, double tau) {
  require(layer_count() == online.layer_count(), "mlp: polyak shape mismatch");
  const real t = static_cast<real>(tau), keep = real(1) - static_cast<real>(tau);
  auto mix = [t, keep](std::vector<real>& dst, const std::vector<real>& src) {
    require(dst.size() == src.size(), "mlp: polyak block mismatch");
    for (size_t i = 0; i < dst.size(); ++i) dst[i] = t * src[i] + keep * dst[i];
  };
  for (int i = 0; i < layer_count(); ++i) {
    mix(layers_[i].w, online.layers_[i].w);
    mix(layers_[i].b, online.layers_[i].b);
    mix(layers_[i].w_sigma, online.layers_[i].w_sigma);
    mix(layers_[i].b_sigma, online.layers_[i].b_sigma);
  }
}

Adam::Adam(const Mlp& net, double lr) : lr_(lr) {
  for (const auto& l : net.layers()) {
    m_.emplace_back(l.w.size(), real(0));
    m_.emplace_back(l.b.size(), real(0));
    m_.emplace_back(l.w_sigma.size(), real(0));
    m_.emplace_back(l.b_sigma.size(), real(0));
  }
  v_ = m_;
}

void Adam::step(Mlp& net, const Mlp::Grads& g) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  size_t blk = 0;
  auto update = [&](std::vector<real>& p, const std::vector<real>& gr) {
    auto& m = m_[blk];
    auto& v = v_[blk];
    ++blk;
    for (size_t i = 0; i < p.size(); ++i) {
      const double gi = static_cast<double>(gr[i]);
      m[i] = static_cast<real>(beta1_ * m[i] + (1.0 - beta1_) * gi);
      v[i] = static_cast<real>(beta2_ * v[i] + (1.0 - beta2_) * gi * gi);
      const double mhat = static_cast<double>(m[i]) / bc1;
      const double vhat = static_cast<double>(v[i]) / bc2;
      p[i] -= static_cast<real>(lr_ * mhat / (std::sqrt(vhat) + eps_));
    }
  };
  for (int li = 0; li < net.layer_count(); ++li) {
    auto& l = net.layers_[li];
    update(l.w, g.w[li]);
    update(l.b, g.b[li]);
    update(l.w_sigma, g.w_sigma[li]);
    update(l.b_sigma, g.b_sigma[li]);
  }
}

}  // namespace cforge
