#include "relaxbl/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace relaxbl {

void JinXinModel::validate() const {
  if (!flux || !flux_derivative) throw InvalidArgument("JinXinModel: flux and flux_derivative are required");
  if (!bc_data) throw InvalidArgument("JinXinModel: bc_data is required");
  if (!init_u || !init_v) throw InvalidArgument("JinXinModel: init_u and init_v are required");
  if (!(epsilon > 0.0)) throw InvalidArgument("JinXinModel: epsilon must be positive");
  if (bc_u == 0.0 && bc_v == 0.0) throw InvalidArgument("JinXinModel: boundary coefficients are both zero");
}

int flux_sign_on_range(const JinXinModel& m, double umin, double umax, int samples) {
  if (umin > umax) std::swap(umin, umax);
  if (samples < 2) samples = 2;
  int sign = 0;
  for (int k = 0; k < samples; ++k) {
    const double u = umin + (umax - umin) * k / (samples - 1);
    const double d = m.flux_derivative(u);
    if (d == 0.0 || !std::isfinite(d)) {
      std::ostringstream os;
      os << "f'(" << u << ") = " << d << " is not single-signed";
      throw DegenerateSign(os.str());
    }
    const int s = d > 0.0 ? 1 : -1;
    if (sign != 0 && s != sign) {
      std::ostringstream os;
      os << "f' changes sign on [" << umin << ", " << umax << "]";
      throw DegenerateSign(os.str());
    }
    sign = s;
  }
  return sign;
}

Matrix relaxation_matrix(std::size_t n, const Matrix& s) {
  if (!s.square() || s.rows() > n) throw InvalidArgument("relaxation_matrix: S must be square with r <= n");
  Matrix q(n, n);
  q.set_block(n - s.rows(), n - s.rows(), s);
  return q;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << c.value;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << '\n';
  }
  return os.str();
}

namespace {

// Ratio of smallest to largest singular value. The eigenvalues of
// [[0, A], [A^T, 0]] are +-sigma_i, resolved to eps * sigma_max (A^T A would
// only resolve sigma to sqrt(eps) * sigma_max).
double inverse_condition(const Matrix& m) {
  const std::size_t n = m.rows();
  if (n == 0) return 1.0;
  Matrix aug(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      aug(i, n + j) = m(i, j);
      aug(n + j, i) = m(i, j);
    }
  const Vector ev = symmetric_eigenvalues(aug);
  const double hi = ev.back();
  if (hi <= 0.0) return 0.0;
  double lo = hi;
  for (double e : ev) lo = std::min(lo, std::abs(e));
  return lo / hi;
}

Matrix symmetric_part(const Matrix& s) {
  Matrix out = s + s.transpose();
  out *= 0.5;
  return out;
}

}  // namespace

ValidationReport validate(const LinearRelaxationSystem& sys) {
  ValidationReport rep;
  auto add = [&](std::string name, bool ok, double value, std::string detail = {}) {
    rep.checks.push_back({std::move(name), ok, value, std::move(detail)});
  };
  const std::size_t n = sys.n;
  const bool shapes = n >= 1 && n <= 4 && sys.r <= n && sys.a.rows() == n && sys.a.cols() == n &&
                      sys.q.rows() == n && sys.q.cols() == n && sys.b.cols() == n;
  add("shapes", shapes, static_cast<double>(n), shapes ? "" : "A, Q must be n x n (n <= 4) and B must have n columns");
  if (!shapes) return rep;

  double off = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i < n - sys.r || j < n - sys.r) off = std::max(off, std::abs(sys.q(i, j)));
  add("q_block_form", off == 0.0, off, "largest entry of Q outside the trailing r x r block");

  if (sys.r > 0) {
    const Vector ev = symmetric_eigenvalues(symmetric_part(sys.s()));
    add("s_negative_definite", ev.back() < 0.0, ev.back(), "max eigenvalue of (S + S^T)/2");
  } else {
    add("s_negative_definite", false, 0.0, "r = 0: no relaxation block");
  }

  const double ca = inverse_condition(sys.a);
  add("a_invertible", ca > 1e-12, ca, "smallest / largest singular value of A");
  if (sys.r < n) {
    const double c11 = inverse_condition(sys.a.block(0, 0, n - sys.r, n - sys.r));
    add("a11_invertible", c11 > 1e-12, c11, "smallest / largest singular value of A11");
  } else {
    add("a11_invertible", false, 0.0, "r = n: empty equilibrium block");
  }

  double min_re = std::numeric_limits<double>::infinity();
  std::size_t n_plus = 0;
  try {
    for (const auto& p : eigen_small(sys.a)) {
      min_re = std::min(min_re, std::abs(p.eigenvalue.real()));
      if (p.eigenvalue.real() > 0.0) ++n_plus;
    }
  } catch (const Error& e) {
    min_re = 0.0;
  }
  const bool nonchar = min_re > 1e-10;
  add("non_characteristic", nonchar, min_re, "min |Re lambda(A)|");
  rep.n_plus = n_plus;
  rep.n_minus = n - n_plus;
  add("n_plus_matches_b", sys.b.rows() == n_plus, static_cast<double>(n_plus),
      "rows(B) = " + std::to_string(sys.b.rows()));

  if (sys.b.rows() > 0 && sys.b.rows() <= n) {
    const Vector ev = symmetric_eigenvalues(sys.b * sys.b.transpose());
    const double smin = std::sqrt(std::max(ev.front(), 0.0));
    const double smax = std::sqrt(std::max(ev.back(), 0.0));
    add("b_full_row_rank", smax > 0.0 && smin > 1e-12 * smax, smin, "smallest singular value of B");
  } else {
    add("b_full_row_rank", sys.b.rows() == 0, 0.0, "B has more rows than columns");
  }
  add("callables", static_cast<bool>(sys.bc_data) && static_cast<bool>(sys.init), 0.0,
      "bc_data and init must be set");
  const bool eps_ok = sys.epsilon > 0.0;
  add("epsilon_positive", eps_ok, sys.epsilon);
  return rep;
}

namespace {

SpectralSplit split_from_right(const Matrix& rp, const Matrix& rm) {
  SpectralSplit s;
  s.r_plus = rp;
  s.r_minus = rm;
  const Matrix l = inverse(hstack(rp, rm));
  s.l_plus = l.block(0, 0, rp.cols(), l.cols());
  s.l_minus = l.block(rp.cols(), 0, rm.cols(), l.cols());
  return s;
}

}  // namespace

DerivedStructure derive_structure(const LinearRelaxationSystem& sys) {
  const std::size_t n = sys.n;
  const std::size_t r = sys.r;
  const std::size_t m = n - r;
  if (r < 1 || r >= n) throw InvalidArgument("derive_structure: need 1 <= r < n");
  DerivedStructure d;
  const Matrix a11 = sys.a.block(0, 0, m, m);
  const Matrix a12 = sys.a.block(0, m, m, r);
  const Matrix a21 = sys.a.block(m, 0, r, m);
  const Matrix a22 = sys.a.block(m, m, r, r);
  d.a11_inv_a12 = solve_dense(a11, a12);
  d.x_mat = inverse(a22 - a21 * d.a11_inv_a12);
  d.h = d.x_mat * sys.s();
  d.split_a = spectral_split(sys.a);
  d.split_a11 = spectral_split(a11);
  d.split_h = spectral_split(d.h);

  // T = [[I, -A11^{-1} A12], [0, I]]
  Matrix t = Matrix::identity(n);
  t.set_block(0, m, d.a11_inv_a12 * -1.0);
  const auto blockdiag = [&](const Matrix& top, const Matrix& bottom) {
    Matrix out(n, top.cols() + bottom.cols());
    out.set_block(0, 0, top);
    out.set_block(m, top.cols(), bottom);
    return out;
  };
  d.r_inf_plus = t * blockdiag(d.split_a11.r_plus, d.split_h.r_minus);
  d.r_inf_minus = t * blockdiag(d.split_a11.r_minus, d.split_h.r_plus);
  if (d.r_inf_plus.cols() != d.split_a.n_plus()) {
    std::ostringstream os;
    os << "derive_structure: n_plus(A11) + n_minus(H) = " << d.r_inf_plus.cols() << " differs from n_plus(A) = "
       << d.split_a.n_plus();
    throw InvalidArgument(os.str());
  }
  d.split_inf = split_from_right(d.r_inf_plus, d.r_inf_minus);
  return d;
}

SpectralSplit m_eta_split(const LinearRelaxationSystem& sys, double eta) {
  const Matrix m = solve_dense(sys.a, Matrix::identity(sys.n) - sys.q * eta);
  return spectral_split(m);
}

double kreiss_ratio(const CMatrix& b, const CMatrix& r_unstable) {
  if (b.rows() != r_unstable.cols()) throw InvalidArgument("kreiss_ratio: B rows must equal unstable dimension");
  if (b.rows() == 0) return 1.0;
  const Complex num = determinant(b * r_unstable);
  const Complex gram = determinant(r_unstable.adjoint() * r_unstable);
  return std::abs(num) / std::sqrt(std::abs(gram));
}

std::vector<GkcSample> default_gkc_samples() {
  std::vector<GkcSample> out;
  constexpr int kMod = 20;
  constexpr int kArg = 20;
  const double etas[] = {0.0, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  out.reserve(kMod * kArg * std::size(etas));
  for (int i = 0; i < kMod; ++i) {
    const double modulus = std::pow(10.0, -2.0 + 4.0 * i / (kMod - 1));
    for (int k = 0; k < kArg; ++k) {
      const double arg = -std::numbers::pi / 2 + std::numbers::pi * (k + 0.5) / kArg;
      for (double eta : etas) out.push_back({std::polar(modulus, arg), eta});
    }
  }
  return out;
}

GkcResult gkc_sample_ratio(const LinearRelaxationSystem& sys, const std::vector<GkcSample>& samples) {
  const std::size_t n = sys.n;
  const CMatrix a_inv = to_complex(inverse(sys.a));
  const CMatrix q = to_complex(sys.q);
  const CMatrix b = to_complex(sys.b);
  GkcResult res;
  res.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (!(s.xi.real() > 0.0)) throw InvalidArgument("gkc_sample_ratio: samples need Re(xi) > 0");
    CMatrix shifted = CMatrix::identity(n) * s.xi - q * Complex(s.eta);
    const CMatrix m = a_inv * shifted;
    CMatrix ru;
    try {
      ru = unstable_basis(m);
    } catch (const CharacteristicBoundary&) {
      res.skipped.push_back(s);
      continue;
    }
    if (ru.cols() != b.rows()) {
      res.skipped.push_back(s);
      continue;
    }
    const double ratio = kreiss_ratio(b, ru);
    ++res.evaluated;
    if (ratio < res.min_ratio) {
      res.min_ratio = ratio;
      res.argmin = s;
    }
  }
  return res;
}

LinearRelaxationSystem jinxin_as_linear(double a_const, double epsilon, double bc_u, double bc_v) {
  LinearRelaxationSystem sys;
  sys.n = 2;
  sys.r = 1;
  sys.a = Matrix{{a_const, 1.0}, {1.0 - a_const * a_const, -a_const}};
  sys.q = relaxation_matrix(2, Matrix{{-1.0}});
  sys.b = Matrix{{bc_u + a_const * bc_v, bc_v}};
  sys.epsilon = epsilon;
  return sys;
}

Vector jinxin_to_linear_vars(double a_const, double u, double v) { return {u, v - a_const * u}; }
Vector linear_to_jinxin_vars(double a_const, double u, double w) { return {u, w + a_const * u}; }

}  // namespace relaxbl
