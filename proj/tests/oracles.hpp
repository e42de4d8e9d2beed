// Test-only reference implementations, independent of the library paths
// they check.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cforge/linalg.hpp"
#include "cforge/model.hpp"
#include "cforge/rng.hpp"
#include "cforge/tensor.hpp"

namespace oracles {

using cforge::i64;
using cforge::LayerDescriptor;
using cforge::LayerKind;
using cforge::Mat;
using cforge::ModelGraph;
using cforge::real;
using cforge::Rng;
using cforge::Tensor;

// Direct definition of cross-correlation: every output pixel evaluated
// independently with explicit index arithmetic.
inline Tensor naive_conv2d(const Tensor& x, const LayerDescriptor& d, const Tensor& w,
                           const Tensor& b) {
  const int ho = (d.h_in + 2 * d.pad - d.k) / d.stride + 1;
  const int wo = (d.w_in + 2 * d.pad - d.k) / d.stride + 1;
  Tensor out({d.c_out, ho, wo});
  for (int co = 0; co < d.c_out; ++co)
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        double acc = b.numel() ? static_cast<double>(b[co]) : 0.0;
        for (int ci = 0; ci < d.c_in; ++ci)
          for (int ky = 0; ky < d.k; ++ky)
            for (int kx = 0; kx < d.k; ++kx) {
              const int iy = oy * d.stride + ky - d.pad;
              const int ix = ox * d.stride + kx - d.pad;
              if (iy < 0 || iy >= d.h_in || ix < 0 || ix >= d.w_in) continue;
              acc += static_cast<double>(
                         w.data[((static_cast<size_t>(co) * d.c_in + ci) * d.k + ky) * d.k + kx]) *
                     static_cast<double>(
                         x.data[(static_cast<size_t>(ci) * d.h_in + iy) * d.w_in + ix]);
            }
        out.data[(static_cast<size_t>(co) * ho + oy) * wo + ox] = static_cast<real>(acc);
      }
  return out;
}

// Plain normal equations via Gaussian elimination with partial pivoting;
// full-column-rank systems only.
inline std::vector<double> normal_equations_lstsq(const Mat& a, const std::vector<double>& b) {
  const int n = a.cols;
  std::vector<std::vector<double>> g(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(n + 1), 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int r = 0; r < a.rows; ++r) s += a.at(r, i) * a.at(r, j);
      g[static_cast<size_t>(i)][static_cast<size_t>(j)] = s;
    }
    double s = 0;
    for (int r = 0; r < a.rows; ++r) s += a.at(r, i) * b[static_cast<size_t>(r)];
    g[static_cast<size_t>(i)][static_cast<size_t>(n)] = s;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(g[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
          std::abs(g[static_cast<size_t>(piv)][static_cast<size_t>(col)]))
        piv = r;
    std::swap(g[static_cast<size_t>(col)], g[static_cast<size_t>(piv)]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = g[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                       g[static_cast<size_t>(col)][static_cast<size_t>(col)];
      for (int c = col; c <= n; ++c)
        g[static_cast<size_t>(r)][static_cast<size_t>(c)] -=
            f * g[static_cast<size_t>(col)][static_cast<size_t>(c)];
    }
  }
  std::vector<double> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] =
        g[static_cast<size_t>(i)][static_cast<size_t>(n)] / g[static_cast<size_t>(i)][static_cast<size_t>(i)];
  return x;
}

// Central finite difference of a scalar functional wrt one coordinate.
inline double central_difference(const std::function<double()>& f, real& coord, double h) {
  const real saved = coord;
  coord = static_cast<real>(static_cast<double>(saved) + h);
  const double hi = f();
  coord = static_cast<real>(static_cast<double>(saved) - h);
  const double lo = f();
  coord = saved;
  return (hi - lo) / (2.0 * h);
}

// O(n^3) dominance-depth fronts (minimization).
inline std::vector<std::vector<int>> brute_force_fronts(
    const std::vector<std::vector<double>>& objs) {
  auto dom = [](const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] > b[i]) return false;
      if (a[i] < b[i]) strict = true;
    }
    return strict;
  };
  std::vector<std::vector<int>> fronts;
  std::vector<bool> assigned(objs.size(), false);
  size_t left = objs.size();
  while (left > 0) {
    std::vector<int> front;
    for (size_t p = 0; p < objs.size(); ++p) {
      if (assigned[p]) continue;
      bool dominated = false;
      for (size_t q = 0; q < objs.size(); ++q) {
        if (q == p || assigned[q]) continue;
        if (dom(objs[q], objs[p])) {
          dominated = true;
          break;
        }
      }
      if (!dominated) front.push_back(static_cast<int>(p));
    }
    for (int p : front) assigned[static_cast<size_t>(p)] = true;
    left -= front.size();
    fronts.push_back(std::move(front));
  }
  return fronts;
}

inline void fill_random(Tensor& t, Rng& rng, double lo = -1.0, double hi = 1.0) {
  for (auto& v : t.data) v = static_cast<real>(rng.uniform(lo, hi));
}

inline LayerDescriptor conv_desc(int idx, int ci, int co, int hin, int win, int k, int s, int p) {
  LayerDescriptor d;
  d.index = idx;
  d.kind = LayerKind::conv;
  d.c_in = ci;
  d.c_out = co;
  d.h_in = hin;
  d.w_in = win;
  d.k = k;
  d.stride = s;
  d.pad = p;
  return d;
}

inline LayerDescriptor fc_desc(int idx, int m_in, int n_out, int hin = 1, int win = 1) {
  LayerDescriptor d;
  d.index = idx;
  d.kind = LayerKind::fc;
  d.m_in = m_in;
  d.n_out = n_out;
  d.h_in = hin;
  d.w_in = win;
  d.k = 1;
  return d;
}

// Small conv->conv->fc chain with random weights.
inline ModelGraph toy_model(u_int64_t seed, int classes = 4) {
  ModelGraph m;
  m.layers = {conv_desc(0, 1, 3, 6, 6, 3, 1, 0),  // -> 3x4x4
              conv_desc(1, 3, 4, 4, 4, 3, 1, 1),  // -> 4x4x4
              fc_desc(2, 4 * 4 * 4, classes, 4, 4)};
  m.head_classes = classes;
  Rng rng(seed);
  for (const auto& d : m.layers) {
    Tensor w(d.weight_shape());
    fill_random(w, rng, -0.5, 0.5);
    m.weights.push_back(std::move(w));
    Tensor b({d.output_units()});
    fill_random(b, rng, -0.1, 0.1);
    m.biases.push_back(std::move(b));
  }
  m.validate();
  return m;
}

// Residual toy: conv0 feeds a two-conv block whose output is added back to
// conv0's output before the head.
inline ModelGraph residual_toy(u_int64_t seed, int channels = 4, int classes = 3) {
  ModelGraph m;
  m.layers = {conv_desc(0, 1, channels, 5, 5, 3, 1, 1),         // -> c x5x5
              conv_desc(1, channels, channels, 5, 5, 3, 1, 1),  // block conv A
              conv_desc(2, channels, channels, 5, 5, 3, 1, 1),  // block conv B
              fc_desc(3, channels * 5 * 5, classes, 5, 5)};
  m.junctions = {{0, 3}};  // out(0) + out(2) feed the fc
  m.head_classes = classes;
  Rng rng(seed);
  for (const auto& d : m.layers) {
    Tensor w(d.weight_shape());
    fill_random(w, rng, -0.4, 0.4);
    m.weights.push_back(std::move(w));
    Tensor b({d.output_units()});
    fill_random(b, rng, -0.05, 0.05);
    m.biases.push_back(std::move(b));
  }
  m.validate();
  return m;
}

}  // namespace oracles
