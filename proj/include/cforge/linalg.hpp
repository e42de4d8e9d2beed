#pragma once

#include <vector>

#include "cforge/types.hpp"

namespace cforge {

/// Dense column-count-tagged matrix in row-major doubles. Linear-algebra
/// helpers run in double regardless of the library `real` type; callers cast
/// at the boundary.
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

/// Minimum-norm least-squares solution of A x = b via normal equations with
/// Tikhonov-style pivot skipping: rank-deficient directions receive zero
/// coefficients. An all-zero A yields the zero vector.
std::vector<double> least_squares_solve(const Mat& a, const std::vector<double>& b);

/// Multi-RHS variant sharing one factorization; B is rows x nrhs, returns
/// cols x nrhs (row-major).
Mat least_squares_solve_multi(const Mat& a, const Mat& b);

}  // namespace cforge
