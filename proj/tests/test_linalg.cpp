#include "doctest.h"

#include "cforge/linalg.hpp"
#include "cforge/rng.hpp"
#include "oracles.hpp"

using namespace cforge;

TEST_CASE("least squares: identity system returns the rhs") {
  Mat a(3, 3);
  for (int i = 0; i < 3; ++i) a.at(i, i) = 1.0;
  auto x = least_squares_solve(a, {4.0, -1.0, 2.5});
  CHECK(x[0] == doctest::Approx(4.0));
  CHECK(x[1] == doctest::Approx(-1.0));
  CHECK(x[2] == doctest::Approx(2.5));
}

TEST_CASE("least squares: overdetermined [1;1] x = [1;3] gives x = 2") {
  Mat a(2, 1);
  a.at(0, 0) = 1.0;
  a.at(1, 0) = 1.0;
  auto x = least_squares_solve(a, {1.0, 3.0});
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("least squares: random 6x3 system matches the normal-equations oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    Mat a(6, 3);
    std::vector<double> b(6);
    for (int r = 0; r < 6; ++r) {
      for (int c = 0; c < 3; ++c) a.at(r, c) = rng.uniform(-2.0, 2.0);
      b[static_cast<size_t>(r)] = rng.uniform(-2.0, 2.0);
    }
    auto got = least_squares_solve(a, b);
    auto want = oracles::normal_equations_lstsq(a, b);
    for (int c = 0; c < 3; ++c)
      CHECK(got[static_cast<size_t>(c)] == doctest::Approx(want[static_cast<size_t>(c)]).epsilon(1e-6));
  }
}

TEST_CASE("least squares: residual is orthogonal to the column space") {
  Rng rng(78);
  Mat a(8, 4);
  std::vector<double> b(8);
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 4; ++c) a.at(r, c) = rng.uniform(-1.0, 1.0);
    b[static_cast<size_t>(r)] = rng.uniform(-1.0, 1.0);
  }
  auto x = least_squares_solve(a, b);
  for (int c = 0; c < 4; ++c) {
    double dot = 0;
    for (int r = 0; r < 8; ++r) {
      double res = b[static_cast<size_t>(r)];
      for (int j = 0; j < 4; ++j) res -= a.at(r, j) * x[static_cast<size_t>(j)];
      dot += a.at(r, c) * res;
    }
    CHECK(std::abs(dot) < 1e-6);
  }
}

TEST_CASE("least squares: all-zero matrix returns the zero vector") {
  Mat a(4, 3);
  auto x = least_squares_solve(a, {1.0, 2.0, 3.0, 4.0});
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("least squares: multi-rhs agrees with column-by-column solves") {
  Rng rng(79);
  Mat a(7, 3);
  Mat b(7, 2);
  for (int r = 0; r < 7; ++r) {
    for (int c = 0; c < 3; ++c) a.at(r, c) = rng.uniform(-1.0, 1.0);
    for (int q = 0; q < 2; ++q) b.at(r, q) = rng.uniform(-1.0, 1.0);
  }
  Mat x = least_squares_solve_multi(a, b);
  for (int q = 0; q < 2; ++q) {
    std::vector<double> col(7);
    for (int r = 0; r < 7; ++r) col[static_cast<size_t>(r)] = b.at(r, q);
    auto single = least_squares_solve(a, col);
    for (int c = 0; c < 3; ++c)
      CHECK(x.at(c, q) == doctest::Approx(single[static_cast<size_t>(c)]).epsilon(1e-10));
  }
}
