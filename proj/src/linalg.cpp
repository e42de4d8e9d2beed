#include "cforge/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace cforge {

namespace {

// In-place Cholesky of an SPD matrix; returns false on a non-positive pivot.
bool cholesky(Mat& g) {
  const int n = g.rows;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = g.at(i, j);
      for (int k = 0; k < j; ++k) s -= g.at(i, k) * g.at(j, k);
      if (i == j) {
        if (s <= 0.0) return false;
        g.at(i, i) = std::sqrt(s);
      } else {
        g.at(i, j) = s / g.at(j, j);
      }
    }
  }
  return true;
}

void chol_solve_inplace(const Mat& l, std::vector<double>& x) {
  const int n = l.rows;
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= l.at(i, k) * x[k];
    x[i] = s / l.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= l.at(k, i) * x[k];
    x[i] = s / l.at(i, i);
  }
}

}  // namespace

Mat least_squares_solve_multi(const Mat& a, const Mat& b) {
  require(a.rows >= 1 && a.rows == b.rows, "least_squares: row mismatch");
  const int n = a.cols, nrhs = b.cols;

  // normal equations; the small ridge keeps rank-deficient systems solvable
  // and drives free directions toward the minimum-norm solution
  Mat g(n, n);
  Mat c(n, nrhs);
  double diag_max = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int r = 0; r < a.rows; ++r) s += a.at(r, i) * a.at(r, j);
      g.at(i, j) = g.at(j, i) = s;
    }
    diag_max = std::max(diag_max, g.at(i, i));
    for (int q = 0; q < nrhs; ++q) {
      double s = 0.0;
      for (int r = 0; r < a.rows; ++r) s += a.at(r, i) * b.at(r, q);
      c.at(i, q) = s;
    }
  }
  if (diag_max == 0.0) return Mat(n, nrhs);  // all-zero A -> zero solution

  double lambda = 1e-12 * diag_max;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Mat l = g;
    for (int i = 0; i < n; ++i) l.at(i, i) += lambda;
    if (cholesky(l)) {
      Mat x(n, nrhs);
      std::vector<double> col(n);
      for (int q = 0; q < nrhs; ++q) {
        for (int i = 0; i < n; ++i) col[i] = c.at(i, q);
        chol_solve_inplace(l, col);
        for (int i = 0; i < n; ++i) x.at(i, q) = col[i];
      }
      return x;
    }
    lambda *= 100.0;
  }
  throw std::runtime_error("least_squares: factorization failed");
}

std::vector<double> least_squares_solve(const Mat& a, const std::vector<double>& b) {
  require(static_cast<int>(b.size()) == a.rows, "least_squares: rhs length mismatch");
  Mat bm(a.rows, 1);
  for (int r = 0; r < a.rows; ++r) bm.at(r, 0) = b[r];
  Mat x = least_squares_solve_multi(a, bm);
  std::vector<double> out(a.cols);
  for (int i = 0; i < a.cols; ++i) out[i] = x.at(i, 0);
  return out;
}

}  // namespace cforge
