#pragma once

// Problem definitions: the nonlinear 2x2 Jin-Xin model and general linear
// relaxation systems U_t + A U_x = Q U / eps with Q = diag(0, S).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaxbl/linalg.hpp"

namespace relaxbl {

using ScalarFn = std::function<double(double)>;
using SpaceTimeFn = std::function<double(double, double)>;
using VectorFn = std::function<Vector(double)>;

/// u_t + v_x = 0,  v_t + u_x = (f(u) - v) / eps + g(x, t),
/// with boundary condition B_u u(0,t) + B_v v(0,t) = b(t).
struct JinXinModel {
  ScalarFn flux;
  ScalarFn flux_derivative;
  double epsilon = 1.0;
  double bc_u = 1.0;
  double bc_v = 1.0;
  ScalarFn bc_data;
  ScalarFn init_u;
  ScalarFn init_v;
  SpaceTimeFn forcing;  // optional
  /// Optional exact state (u, v) at the right edge, for Dirichlet closure.
  VectorFn right_state;

  double forcing_at(double x, double t) const { return forcing ? forcing(x, t) : 0.0; }
  /// Throws InvalidArgument on missing callables or non-positive epsilon.
  void validate() const;
};

/// Sign (+1 or -1) of f' sampled at `samples` points of [umin, umax].
/// Throws DegenerateSign if f' vanishes or changes sign.
int flux_sign_on_range(const JinXinModel& m, double umin, double umax, int samples = 257);

struct LinearRelaxationSystem {
  std::size_t n = 0;
  std::size_t r = 0;
  Matrix a;  // n x n
  Matrix q;  // n x n, diag(0_{n-r}, S)
  Matrix b;  // n_plus x n
  double epsilon = 1.0;
  VectorFn bc_data;  // t -> R^{n_plus}
  VectorFn init;     // x -> R^n
  /// Optional exact state at the right edge, for Dirichlet closure.
  VectorFn right_state;

  Matrix s() const { return q.block(n - r, n - r, r, r); }
};

/// Builds Q = diag(0_{n-r}, S).
Matrix relaxation_matrix(std::size_t n, const Matrix& s);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  // the offending or measured quantity
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;

  bool ok() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string summary() const;
};

/// Pass/fail per structural assumption; never throws.
ValidationReport validate(const LinearRelaxationSystem& sys);

/// Equilibrium and boundary-layer matrices and the eta -> infinity limit of
/// the stable/unstable splits of M(1, eta) = A^{-1}(I - eta Q).
struct DerivedStructure {
  Matrix a11_inv_a12;  // (n-r) x r
  Matrix x_mat;        // (A22 - A21 A11^{-1} A12)^{-1}
  Matrix h;            // x_mat * S
  SpectralSplit split_a;
  SpectralSplit split_a11;
  SpectralSplit split_h;
  Matrix r_inf_plus;
  Matrix r_inf_minus;
  SpectralSplit split_inf;  // (r_inf_plus, r_inf_minus) with left blocks by inversion
};

/// Throws InvalidArgument unless 1 <= r < n, CharacteristicBoundary from the
/// splits, SingularMatrix from A11 or X.
DerivedStructure derive_structure(const LinearRelaxationSystem& sys);

/// Stable/unstable split of M(1, eta) = A^{-1}(I - eta Q).
SpectralSplit m_eta_split(const LinearRelaxationSystem& sys, double eta);

struct GkcSample {
  Complex xi;
  double eta = 0.0;
};

struct GkcResult {
  double min_ratio = 0.0;
  GkcSample argmin{};
  std::size_t evaluated = 0;
  std::vector<GkcSample> skipped;  // eigenvalue on (or near) the imaginary axis
};

/// |det(B R)| / sqrt(det(R^* R)); independent of the column basis of R.
double kreiss_ratio(const CMatrix& b, const CMatrix& r_unstable);

/// 20 moduli log-spaced in [1e-2, 1e2] x 20 arguments in (-pi/2, pi/2) x
/// eta in {0, 1e-2, ..., 1e4}.
std::vector<GkcSample> default_gkc_samples();

/// Sampled generalized Kreiss diagnostic: minimum kreiss_ratio of B against
/// the unstable subspace of A^{-1}(xi I - eta Q). Samples whose unstable
/// dimension differs from rows(B) are reported as skipped.
GkcResult gkc_sample_ratio(const LinearRelaxationSystem& sys, const std::vector<GkcSample>& samples);

/// Linear Jin-Xin model f(u) = a u in the variables (u, w = v - a u):
/// A = [[a, 1], [1 - a^2, -a]], S = [-1], B = (B_u + a B_v, B_v).
LinearRelaxationSystem jinxin_as_linear(double a_const, double epsilon, double bc_u = 1.0,
                                        double bc_v = 1.0);

/// (u, v) -> (u, v - a u) and back.
Vector jinxin_to_linear_vars(double a_const, double u, double v);
Vector linear_to_jinxin_vars(double a_const, double u, double w);

}  // namespace relaxbl
