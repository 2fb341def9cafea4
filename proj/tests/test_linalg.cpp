#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "relaxbl/linalg.hpp"

using namespace relaxbl;

namespace {

double residual_ratio(const Matrix& m, const EigenPair& p) {
  const CMatrix cm = to_complex(m);
  const CVector mv = cm * p.right_eigenvector;
  double r = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i)
    r += std::norm(mv[i] - p.eigenvalue * p.right_eigenvector[i]);
  return std::sqrt(r) / m.max_abs();
}

std::vector<double> sorted_real_parts(const std::vector<EigenPair>& pairs) {
  std::vector<double> re;
  for (const auto& p : pairs) re.push_back(p.eigenvalue.real());
  std::sort(re.begin(), re.end());
  return re;
}

double cubic(double a3, double a2, double a1, double a0, double x) {
  return ((a3 * x + a2) * x + a1) * x + a0;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

}  // namespace

TEST_CASE("eigen_small: identity has a double eigenvalue 1") {
  const auto pairs = eigen_small(Matrix::identity(2));
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK(std::abs(p.eigenvalue - Complex(1.0)) < 1e-12);
    CHECK(residual_ratio(Matrix::identity(2), p) < 1e-12);
  }
}

TEST_CASE("eigen_small: Jin-Xin flux matrix has eigenvalues +1 and -1") {
  const Matrix a{{0, 1}, {1, 0}};
  const auto re = sorted_real_parts(eigen_small(a));
  CHECK(re[0] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(re[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eigen_small: three-component flux has one negative and two positive eigenvalues") {
  // Oracle: sign changes of det(A - lambda I) = -l^3 + l^2 + 2l - 1 at integers.
  int sign_changes_neg = 0;
  int sign_changes_pos = 0;
  for (int x = -3; x < 0; ++x)
    if (cubic(-1, 1, 2, -1, x) * cubic(-1, 1, 2, -1, x + 1) < 0) ++sign_changes_neg;
  for (int x = 0; x < 3; ++x)
    if (cubic(-1, 1, 2, -1, x) * cubic(-1, 1, 2, -1, x + 1) < 0) ++sign_changes_pos;
  REQUIRE(sign_changes_neg == 1);
  REQUIRE(sign_changes_pos == 2);

  const Matrix a{{0, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  const auto pairs = eigen_small(a);
  int neg = 0;
  int pos = 0;
  for (const auto& p : pairs) {
    CHECK(std::abs(p.eigenvalue.imag()) < 1e-12);
    CHECK(std::abs(cubic(-1, 1, 2, -1, p.eigenvalue.real())) < 1e-12);
    (p.eigenvalue.real() < 0 ? neg : pos)++;
    CHECK(residual_ratio(a, p) < 1e-12);
  }
  CHECK(neg == 1);
  CHECK(pos == 2);
}

TEST_CASE("eigen_small: rejects non-square and oversized input") {
  CHECK_THROWS_AS(eigen_small(Matrix(2, 3)), InvalidArgument);
  CHECK_THROWS_AS(eigen_small(Matrix::identity(5)), InvalidArgument);
}

TEST_CASE("eigen_small: complex pair of a rotation-like matrix") {
  const Matrix a{{1, -2}, {2, 1}};
  const auto pairs = eigen_small(a);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK(p.eigenvalue.real() == doctest::Approx(1.0));
    CHECK(std::abs(std::abs(p.eigenvalue.imag()) - 2.0) < 1e-12);
    CHECK(residual_ratio(a, p) < 1e-12);
  }
}

TEST_CASE("polynomial_roots: widely separated roots") {
  // (z - 1e8)(z - 1)(z + 1) = z^3 - 1e8 z^2 - z + 1e8
  const CVector c{1e8, -1.0, -1e8, 1.0};
  auto roots = polynomial_roots(c);
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  CHECK(roots[0].real() == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK(roots[1].real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(roots[2].real() == doctest::Approx(1e8).epsilon(1e-13));
}

TEST_CASE("spectral_split: Jin-Xin flux matrix") {
  const Matrix a{{0, 1}, {1, 0}};
  const auto s = spectral_split(a);
  REQUIRE(s.n_plus() == 1);
  REQUIRE(s.n_minus() == 1);
  CHECK(subspace_gap(s.r_plus, Matrix{{1}, {1}}) < 1e-14);
  CHECK(subspace_gap(s.r_minus, Matrix{{-1}, {1}}) < 1e-14);
}

TEST_CASE("spectral_split: diagonal matrix") {
  const Matrix a{{-2, 0}, {0, 3}};
  const auto s = spectral_split(a);
  CHECK(subspace_gap(s.r_minus, Matrix{{1}, {0}}) < 1e-15);
  CHECK(subspace_gap(s.r_plus, Matrix{{0}, {1}}) < 1e-15);
}

TEST_CASE("spectral_split: interface example flux matrix has n+ = 1, n- = 2") {
  // det(A - l I) = -l^3 - l^2 + 2l + 1: roots in (-2,-1), (-1,0), (1,2).
  int pos_roots = 0;
  int neg_roots = 0;
  for (int x = -3; x < 3; ++x)
    if (cubic(-1, -1, 2, 1, x) * cubic(-1, -1, 2, 1, x + 1) < 0) (x < 0 ? neg_roots : pos_roots)++;
  REQUIRE(pos_roots == 1);
  REQUIRE(neg_roots == 2);
  const Matrix a{{-1, 1, 0}, {1, 0, 1}, {0, 1, 0}};
  const auto s = spectral_split(a);
  CHECK(static_cast<int>(s.n_plus()) == pos_roots);
  CHECK(static_cast<int>(s.n_minus()) == neg_roots);
}

TEST_CASE("spectral_split: complex pair becomes a real two-column block") {
  const Matrix a{{1, -2, 0}, {2, 1, 0}, {0, 0, -3}};
  const auto s = spectral_split(a);
  REQUIRE(s.n_plus() == 2);
  REQUIRE(s.n_minus() == 1);
  CHECK(subspace_gap(s.r_plus, Matrix{{1, 0}, {0, 1}, {0, 0}}) < 1e-14);
}

TEST_CASE("spectral_split: eigenvalue on the imaginary axis is rejected") {
  CHECK_THROWS_AS(spectral_split(Matrix{{0, 1}, {-1, 0}}), CharacteristicBoundary);
  CHECK_THROWS_AS(spectral_split(Matrix{{1, 0}, {0, 0}}), CharacteristicBoundary);
}

TEST_CASE("solve_dense: identity, permutation and a 2x2 closed-form inverse") {
  const Vector x1 = solve_dense(Matrix::identity(2), Vector{3, 4});
  CHECK(x1[0] == 3.0);
  CHECK(x1[1] == 4.0);
  const Vector x2 = solve_dense(Matrix{{0, 1}, {1, 0}}, Vector{5, -7});
  CHECK(x2[0] == -7.0);
  CHECK(x2[1] == 5.0);

  // Reduced boundary system of the three-component example.
  const double r = 1.0 / std::sqrt(2.0);
  const Matrix m{{r, -1}, {r, 2}};
  const Vector rhs{-0.3, 0.8};
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Vector oracle{(m(1, 1) * rhs[0] - m(0, 1) * rhs[1]) / det,
                      (-m(1, 0) * rhs[0] + m(0, 0) * rhs[1]) / det};
  const Vector x3 = solve_dense(m, rhs);
  CHECK(x3[0] == doctest::Approx(oracle[0]).epsilon(1e-14));
  CHECK(x3[1] == doctest::Approx(oracle[1]).epsilon(1e-14));
}

TEST_CASE("solve_dense: singular input") {
  CHECK_THROWS_AS(solve_dense(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), SingularMatrix);
  CHECK_THROWS_AS(solve_dense(Matrix{{0, 0}, {1, 1}}, Vector{1, 1}), SingularMatrix);
}

TEST_CASE("solve_dense: residual bound on random systems") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 4;
    const Matrix m = random_matrix(rng, n, n);
    const Matrix b = random_matrix(rng, n, 1);
    Vector x;
    try {
      x = solve_dense(m, b.col(0));
    } catch (const SingularMatrix&) {
      continue;
    }
    const Vector mx = m * x;
    double res = 0.0;
    double xn = 0.0;
    double bn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res = std::max(res, std::abs(mx[i] - b(i, 0)));
      xn = std::max(xn, std::abs(x[i]));
      bn = std::max(bn, std::abs(b(i, 0)));
    }
    CHECK(res <= 1e-12 * (m.max_abs() * xn + bn));
  }
}

TEST_CASE("subspace_gap: basic cases") {
  const Matrix e1{{1}, {0}};
  const Matrix e2{{0}, {1}};
  CHECK(subspace_gap(e1, e1) == 0.0);
  CHECK(subspace_gap(e1, e2) == doctest::Approx(std::numbers::pi / 2));
  CHECK(subspace_gap(Matrix{{1}, {1}}, Matrix{{2}, {2}}) < 1e-15);
  CHECK_THROWS_AS(subspace_gap(Matrix{{1, 2}, {1, 2}}, Matrix{{1, 0}, {0, 1}}), InvalidArgument);
  // Small angles are resolved (no acos cancellation).
  CHECK(subspace_gap(e1, Matrix{{1}, {1e-9}}) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("property: eigen_small residual on random matrices") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  int trials = 0;
  while (checked < 1000) {
    ++trials;
    const std::size_t n = 1 + static_cast<std::size_t>(trials % 4);
    const Matrix m = random_matrix(rng, n, n);
    const auto pairs = eigen_small(m);
    REQUIRE(pairs.size() == n);
    double gap = 1e300;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        gap = std::min(gap, std::abs(pairs[i].eigenvalue - pairs[j].eigenvalue));
    if (gap < 1e-4) continue;
    ++checked;
    for (const auto& p : pairs) {
      CHECK(residual_ratio(m, p) <= 1e-10);
    }
  }
}

TEST_CASE("property: split reconstruction and stable/unstable restriction") {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 300) {
    const std::size_t n = 1 + static_cast<std::size_t>(checked % 4);
    const Matrix m = random_matrix(rng, n, n);
    SpectralSplit s;
    try {
      s = spectral_split(m, 1e-3);
    } catch (const CharacteristicBoundary&) {
      continue;
    }
    ++checked;
    const Matrix recon = s.projector_plus() + s.projector_minus();
    CHECK((recon - Matrix::identity(n)).max_abs() <= 1e-10);
    const Matrix stacked = vstack(s.l_plus, s.l_minus) * hstack(s.r_plus, s.r_minus);
    CHECK((stacked - Matrix::identity(n)).max_abs() <= 1e-10);
    if (s.n_minus() > 0) {
      const Matrix restricted = s.l_minus * m * s.r_minus;
      CHECK((m * s.r_minus - s.r_minus * restricted).max_abs() <= 1e-10);
      for (const auto& p : eigen_small(restricted)) CHECK(p.eigenvalue.real() < 0.0);
    }
    if (s.n_plus() > 0) {
      const Matrix restricted = s.l_plus * m * s.r_plus;
      CHECK((m * s.r_plus - s.r_plus * restricted).max_abs() <= 1e-10);
      for (const auto& p : eigen_small(restricted)) CHECK(p.eigenvalue.real() > 0.0);
    }
  }
}

TEST_CASE("property: subspace_gap invariant under right multiplication") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
    const std::size_t k = 1 + static_cast<std::size_t>(trial % (n - 1));
    const Matrix a = random_matrix(rng, n, k);
    const Matrix b = random_matrix(rng, n, k);
    Matrix t = random_matrix(rng, k, k);
    for (std::size_t i = 0; i < k; ++i) t(i, i) += 3.0;  // well conditioned
    const double g = subspace_gap(a, b);
    CHECK(std::abs(subspace_gap(a * t, b) - g) <= 1e-10);
    CHECK(std::abs(subspace_gap(a, b * t) - g) <= 1e-10);
  }
}

TEST_CASE("symmetric_eigenvalues: matches closed form for 2x2") {
  const Matrix s{{2, 1}, {1, 2}};
  const Vector ev = symmetric_eigenvalues(s);
  CHECK(ev[0] == doctest::Approx(1.0));
  CHECK(ev[1] == doctest::Approx(3.0));
}
