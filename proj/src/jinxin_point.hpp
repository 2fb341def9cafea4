#pragma once

// Pointwise nonlinear 2x2 solve shared by the Jin-Xin boundary closure and the
// Jin-Xin interface scheme. Every row has the form
//   F(u, v) = w1 u + w2 v - w2 kappa (f(u) - v) - c,
// which covers characteristic rows with implicit source (kappa = tau/eps) and
// the linear boundary condition (kappa = 0).

#include <array>

#include "relaxbl/grid.hpp"
#include "relaxbl/models.hpp"

namespace relaxbl::detail {

struct PointRow {
  double w1 = 0.0;
  double w2 = 0.0;
  double kappa = 0.0;
  double c = 0.0;
};

struct PointSolveStats {
  int newton_iterations = 0;
  bool used_bisection = false;
};

/// Newton with analytic Jacobian from `guess`; on failure, bisection on the
/// scalar equation obtained by eliminating v. Throws ConvergenceFailure.
std::array<double, 2> solve_point(const std::array<PointRow, 2>& rows, const ScalarFn& f, const ScalarFn& df,
                                  std::array<double, 2> guess, double tol, int max_iters,
                                  PointSolveStats* stats = nullptr);

/// The coefficient a at grid point j: f'(u_j) or its sign per cfg.a_mode. In
/// derivative mode the stencil neighbours must share the sign of f'.
double resolve_a(const JinXinModel& m, const GridFunction& U, std::size_t j, const SchemeConfig& cfg);

}  // namespace relaxbl::detail
