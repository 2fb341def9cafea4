#pragma once

// Reference solutions: closed-form asymptotic solutions of the worked
// examples, the scalar equilibrium solver, the Jin-Xin boundary-layer ODE,
// the reduced boundary-condition solve and fine-mesh references.

#include <functional>
#include <string>
#include <vector>

#include "relaxbl/grid.hpp"
#include "relaxbl/models.hpp"
#include "relaxbl/schemes.hpp"

namespace relaxbl {

/// outer(x, t) + layer_amplitude(t) * exp(-layer_decay * x / epsilon).
struct AsymptoticSolution {
  std::string id;
  double epsilon = 0.0;
  std::size_t components = 0;
  bool exact = false;  // true if evaluate() solves the full system exactly
  std::function<Vector(double, double)> outer;
  std::function<Vector(double)> layer_amplitude;
  double layer_decay = 0.0;

  Vector evaluate(double x, double t) const;
  /// Grid limit as eps -> 0: the layer survives only at the boundary point.
  Vector grid_limit(std::size_t j, double x, double t) const;
  /// Grid function of evaluate() (or of grid_limit() if `limit`).
  GridFunction on_grid(const Grid1D& grid, double t, bool limit = false) const;
};

/// Ids "1a", "1b", "1c", "3". The second overload replaces the example's
/// relaxation time. Throws InvalidArgument on an unknown id.
AsymptoticSolution example_closed_form(const std::string& id);
AsymptoticSolution example_closed_form(const std::string& id, double epsilon);

struct EquilibriumOptions {
  double cfl = 0.9;
  std::vector<double> output_times;
};

/// First-order upwind for ubar_t + f(ubar)_x = 0 (one component). The
/// inflow edge (right for f' < 0, left for f' > 0) takes `inflow(t)`; the
/// other edge uses the one-sided update. Throws DegenerateSign if f' changes
/// sign on the grid during the run.
Trajectory equilibrium_scalar_solve(const ScalarFn& f, const ScalarFn& df, const ScalarFn& init,
                                    const Grid1D& grid, double t_final, const ScalarFn& inflow,
                                    const EquilibriumOptions& opts = {});

/// mu(0, t) = (b(t) - B_u ubar0 - B_v f(ubar0)) / B_u. Requires B_u != 0 and
/// f'(ubar0) < 0.
double jinxin_layer_amplitude(const JinXinModel& model, double ubar0, double t);

/// RK4 samples mu(y_k), y_k = k * y_max / steps, of mu_y = f(ubar0 + mu) - f(ubar0).
/// Throws NumericalFailure if |mu| grows (non-admissible layer datum).
std::vector<double> jinxin_layer_profile(const JinXinModel& model, double ubar0, double mu0, double y_max,
                                         int steps);

/// Default integration horizon 50 / |f'(ubar0)|.
double default_layer_horizon(const JinXinModel& model, double ubar0);

struct ReducedBCSolution {
  Vector alpha_plus;
  Vector nu;
  Vector ubar0;  // R+^1 alpha+ + R-^1 alpha-
  Vector mu0;    // -A11^{-1} A12 nu
};

/// [[B_u R+^1, B_v - B_u A11^{-1} A12], [0, L+^H]] (alpha+, nu) =
/// (b(t) - B_u R-^1 alpha-, 0).
struct ReducedBCSystem {
  Matrix matrix;
  std::size_t n_alpha_plus = 0;
  std::size_t r = 0;
  Matrix b_u;
  Matrix r_minus_1;
  Matrix r_plus_1;
  Matrix a11_inv_a12;
  VectorFn bc_data;

  Vector rhs(double t, const Vector& alpha_minus) const;
  ReducedBCSolution solve(double t, const Vector& alpha_minus) const;
};

/// Throws SingularMatrix (suspected GKC violation) if the matrix is singular.
ReducedBCSystem reduced_bc_build(const LinearRelaxationSystem& sys, const DerivedStructure& derived);

/// Jin-Xin: (ubar_0 + mu0, f(ubar_0)) at j = 0 and (ubar_j, f(ubar_j)) else.
GridFunction asymptotic_limit_on_grid(const std::vector<double>& ubar, double mu0, const ScalarFn& f);
/// Linear systems: (ubar_0 - A11^{-1} A12 nu0, nu0) at j = 0 and (ubar_j, 0) else.
GridFunction asymptotic_limit_on_grid(const GridFunction& ubar, const Vector& nu0, const Matrix& a11_inv_a12);

/// Restriction by exact point coincidence. Throws InvalidArgument if the
/// coarse grid is not nested in the fine one.
GridFunction restrict_to(const GridFunction& fine, const Grid1D& fine_grid, const Grid1D& coarse);

/// Fine grid with the same end points as `coarse` and h = coarse.h / k for
/// the integer k = coarse.h / h_fine.
Grid1D nested_fine_grid(const Grid1D& coarse, double h_fine);

/// Runs `solve_fine` on the nested fine grid and restricts the result.
/// `eps_min`, if positive, must exceed h_fine (the layer is resolved).
GridFunction fine_mesh_reference(const std::function<GridFunction(const Grid1D&)>& solve_fine,
                                 const Grid1D& coarse, double h_fine, double eps_min = 0.0);

}  // namespace relaxbl
