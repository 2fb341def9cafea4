#include "jinxin_point.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace relaxbl::detail {

namespace {

double row_value(const PointRow& r, const ScalarFn& f, double u, double v) {
  return r.w1 * u + r.w2 * v - r.w2 * r.kappa * (f(u) - v) - r.c;
}

double row_scale(const PointRow& r) {
  return std::abs(r.w1) + std::abs(r.w2) * (1.0 + r.kappa) + std::abs(r.c);
}

// Each row is affine in v: F = alpha(u) + beta v.
struct Reduced {
  const std::array<PointRow, 2>& rows;
  const ScalarFn& f;
  int pivot;  // row used to eliminate v

  double beta(int k) const { return rows[k].w2 * (1.0 + rows[k].kappa); }
  double alpha(int k, double u) const { return rows[k].w1 * u - rows[k].w2 * rows[k].kappa * f(u) - rows[k].c; }
  double v_of(double u) const { return -alpha(pivot, u) / beta(pivot); }
  double phi(double u) const {
    const int o = 1 - pivot;
    return alpha(o, u) - beta(o) * alpha(pivot, u) / beta(pivot);
  }
};

}  // namespace

std::array<double, 2> solve_point(const std::array<PointRow, 2>& rows, const ScalarFn& f, const ScalarFn& df,
                                  std::array<double, 2> guess, double tol, int max_iters,
                                  PointSolveStats* stats) {
  double u = guess[0];
  double v = guess[1];
  int it = 0;
  bool converged = false;
  for (; it < max_iters; ++it) {
    const double f0 = row_value(rows[0], f, u, v);
    const double f1 = row_value(rows[1], f, u, v);
    const double d = df(u);
    const double j00 = rows[0].w1 - rows[0].w2 * rows[0].kappa * d;
    const double j01 = rows[0].w2 * (1.0 + rows[0].kappa);
    const double j10 = rows[1].w1 - rows[1].w2 * rows[1].kappa * d;
    const double j11 = rows[1].w2 * (1.0 + rows[1].kappa);
    const double det = j00 * j11 - j01 * j10;
    if (det == 0.0 || !std::isfinite(det)) break;
    const double du = (f0 * j11 - f1 * j01) / det;
    const double dv = (j00 * f1 - j10 * f0) / det;
    u -= du;
    v -= dv;
    if (!std::isfinite(u) || !std::isfinite(v)) break;
    if (std::abs(du) + std::abs(dv) <= tol * (1.0 + std::abs(u) + std::abs(v))) {
      converged = true;
      ++it;
      break;
    }
  }
  if (stats) stats->newton_iterations = it;
  if (converged) return {u, v};

  // Bisection fallback on the scalar equation in u.
  if (stats) stats->used_bisection = true;
  const double b0 = rows[0].w2 * (1.0 + rows[0].kappa);
  const double b1 = rows[1].w2 * (1.0 + rows[1].kappa);
  const double resid = std::abs(row_value(rows[0], f, guess[0], guess[1])) +
                       std::abs(row_value(rows[1], f, guess[0], guess[1]));
  auto fail = [&](const char* why) {
    std::ostringstream os;
    os << "pointwise 2x2 solve failed after " << it << " Newton iterations (" << why
       << "); initial residual " << resid;
    return ConvergenceFailure(os.str());
  };
  if (b0 == 0.0 && b1 == 0.0) throw fail("v does not enter the system");
  const Reduced red{rows, f, std::abs(b0) >= std::abs(b1) ? 0 : 1};
  const double x0 = guess[0];
  double lo = x0, hi = x0;
  double plo = red.phi(lo), phi_hi = plo;
  bool bracketed = plo == 0.0;
  for (double width = 1e-3 * (1.0 + std::abs(x0)); !bracketed && width < 1e8 * (1.0 + std::abs(x0)); width *= 2.0) {
    lo = x0 - width;
    hi = x0 + width;
    plo = red.phi(lo);
    phi_hi = red.phi(hi);
    if (std::isfinite(plo) && std::isfinite(phi_hi) && plo * phi_hi <= 0.0) bracketed = true;
  }
  if (!bracketed) throw fail("no sign change found for bisection");
  for (int k = 0; k < 400 && hi - lo > 4e-16 * (1.0 + std::abs(lo) + std::abs(hi)); ++k) {
    const double mid = 0.5 * (lo + hi);
    const double pm = red.phi(mid);
    if (pm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((pm < 0.0) == (plo < 0.0)) {
      lo = mid;
      plo = pm;
    } else {
      hi = mid;
    }
  }
  u = 0.5 * (lo + hi);
  v = red.v_of(u);
  const double scale = row_scale(rows[0]) + row_scale(rows[1]);
  const double final_res = std::abs(row_value(rows[0], f, u, v)) + std::abs(row_value(rows[1], f, u, v));
  if (!std::isfinite(final_res) || final_res > 1e-8 * scale * (1.0 + std::abs(u) + std::abs(v)))
    throw fail("bisection did not reduce the residual");
  return {u, v};
}

namespace {
int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }
}  // namespace

double resolve_a(const JinXinModel& m, const GridFunction& U, std::size_t j, const SchemeConfig& cfg) {
  const double d = m.flux_derivative(U(j, 0));
  const int s = sign_of(d);
  if (s == 0) {
    std::ostringstream os;
    os << "f'(u) vanishes at grid point " << j;
    throw DegenerateSign(os.str());
  }
  if (cfg.a_mode == AMode::sign) return static_cast<double>(s);
  const std::size_t lo = j == 0 ? 0 : j - 1;
  const std::size_t hi = std::min(j + 1, U.num_points() - 1);
  for (std::size_t k = lo; k <= hi; ++k) {
    if (sign_of(m.flux_derivative(U(k, 0))) != s) {
      std::ostringstream os;
      os << "f' changes sign across the stencil of grid point " << j;
      throw DegenerateSign(os.str());
    }
  }
  return d;
}

}  // namespace relaxbl::detail
