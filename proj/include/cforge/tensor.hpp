#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "cforge/types.hpp"

namespace cforge {

/// Dense row-major tensor of `real`. Shape is a plain dim list; all layout
/// conventions (CHW for feature maps, [out][in] for weight matrices) live at
/// the call sites.
struct Tensor {
  std::vector<int> shape;
  std::vector<real> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), real(0)) {}
  Tensor(std::vector<int> s, std::vector<real> d) : shape(std::move(s)), data(std::move(d)) {
    require(static_cast<i64>(data.size()) == numel_of(shape), "tensor: shape/data size mismatch");
  }

  static i64 numel_of(const std::vector<int>& s) {
    i64 n = 1;
    for (int d : s) n *= d;
    return n;
  }

  i64 numel() const { return static_cast<i64>(data.size()); }

  real* begin() { return data.data(); }
  real* end() { return data.data() + data.size(); }
  const real* begin() const { return data.data(); }
  const real* end() const { return data.data() + data.size(); }

  real& operator[](i64 i) { return data[static_cast<size_t>(i)]; }
  real operator[](i64 i) const { return data[static_cast<size_t>(i)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (real v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

}  // namespace cforge
