#include "relaxbl/reference.hpp"

#include <cmath>
#include <sstream>

namespace relaxbl {

Vector AsymptoticSolution::evaluate(double x, double t) const {
  Vector u = outer(x, t);
  if (layer_amplitude && layer_decay > 0.0) {
    const double w = std::exp(-layer_decay * x / epsilon);
    if (w > 0.0) {
      const Vector m = layer_amplitude(t);
      for (std::size_t c = 0; c < u.size(); ++c) u[c] += m[c] * w;
    }
  }
  return u;
}

Vector AsymptoticSolution::grid_limit(std::size_t j, double x, double t) const {
  Vector u = outer(x, t);
  if (j == 0 && layer_amplitude && layer_decay > 0.0) {
    const Vector m = layer_amplitude(t);
    for (std::size_t c = 0; c < u.size(); ++c) u[c] += m[c];
  }
  return u;
}

GridFunction AsymptoticSolution::on_grid(const Grid1D& grid, double t, bool limit) const {
  GridFunction g(grid.num_points, components);
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    const Vector u = limit ? grid_limit(j, grid.x(j), t) : evaluate(grid.x(j), t);
    for (std::size_t c = 0; c < components; ++c) g(j, c) = u[c];
  }
  return g;
}

AsymptoticSolution example_closed_form(const std::string& id) {
  if (id == "1a" || id == "1b") return example_closed_form(id, 1e-9);
  if (id == "1c") return example_closed_form(id, 1.0);
  if (id == "3") return example_closed_form(id, 1e-6);
  throw InvalidArgument("example_closed_form: unknown example id '" + id + "'");
}

AsymptoticSolution example_closed_form(const std::string& id, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("example_closed_form: epsilon must be positive");
  AsymptoticSolution s;
  s.id = id;
  s.epsilon = epsilon;
  if (id == "1a") {
    // f(u) = -u/2: the layer mu_y = -mu/2 decays at rate 1/2 in y = x/eps.
    s.components = 2;
    s.outer = [](double x, double t) { return Vector{2.0 * std::sin(x + t / 2), -std::sin(x + t / 2)}; };
    s.layer_amplitude = [](double t) { return Vector{std::sin(t), 0.0}; };
    s.layer_decay = 0.5;
  } else if (id == "1b") {
    s.components = 2;
    s.outer = [](double x, double t) { return Vector{2.0 * std::sin(x - t / 2), std::sin(x - t / 2)}; };
  } else if (id == "1c") {
    s.components = 2;
    s.exact = true;
    s.outer = [](double x, double t) { return Vector{std::sin(x + t), -std::sin(x + t)}; };
  } else if (id == "3") {
    s.components = 3;
    s.outer = [](double x, double t) {
      return Vector{std::sin(x - t) + std::sin(x + t), std::sin(x - t) - std::sin(x + t), 0.0};
    };
    s.layer_amplitude = [](double t) { return Vector{-std::sin(t), 0.0, std::sin(t)}; };
    s.layer_decay = 1.0;
  } else {
    throw InvalidArgument("example_closed_form: unknown example id '" + id + "'");
  }
  return s;
}

Trajectory equilibrium_scalar_solve(const ScalarFn& f, const ScalarFn& df, const ScalarFn& init,
                                    const Grid1D& grid, double t_final, const ScalarFn& inflow,
                                    const EquilibriumOptions& opts) {
  grid.validate();
  const std::size_t n = grid.num_points;
  SolutionState s0{0.0, GridFunction(n, 1)};
  double speed = 0.0;
  int sign = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double u = init(grid.x(j));
    s0.values(j, 0) = u;
    const double d = df(u);
    const int sj = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (sj == 0 || (sign != 0 && sj != sign)) throw DegenerateSign("equilibrium_scalar_solve: f' is not single-signed");
    sign = sj;
    speed = std::max(speed, std::abs(d));
  }
  const double tau = opts.cfl * grid.h / speed;
  RunOptions ro;
  ro.t_final = t_final;
  ro.output_times = opts.output_times;
  return march(std::move(s0), tau, ro, [&](const SolutionState& s, double dt) {
    const GridFunction& U = s.values;
    SolutionState out{s.time + dt, GridFunction(n, 1)};
    const double lam = dt / grid.h;
    std::vector<double> fu(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = df(U(j, 0));
      if (!(sign > 0 ? d > 0.0 : d < 0.0)) {
        std::ostringstream os;
        os << "equilibrium_scalar_solve: f' changes sign at x = " << grid.x(j) << ", t = " << s.time;
        throw DegenerateSign(os.str());
      }
      if (dt * std::abs(d) > grid.h) throw NumericalFailure("equilibrium_scalar_solve: CFL condition lost");
      fu[j] = f(U(j, 0));
    }
    if (sign < 0) {
      for (std::size_t j = 0; j + 1 < n; ++j) out.values(j, 0) = U(j, 0) - lam * (fu[j + 1] - fu[j]);
      out.values(n - 1, 0) = inflow(s.time + dt);
    } else {
      out.values(0, 0) = inflow(s.time + dt);
      for (std::size_t j = 1; j < n; ++j) out.values(j, 0) = U(j, 0) - lam * (fu[j] - fu[j - 1]);
    }
    return out;
  });
}

double jinxin_layer_amplitude(const JinXinModel& model, double ubar0, double t) {
  if (model.bc_u == 0.0) throw InvalidArgument("jinxin_layer_amplitude: B_u = 0, the boundary condition cannot determine mu");
  if (!(model.flux_derivative(ubar0) < 0.0))
    throw InvalidArgument("jinxin_layer_amplitude: f'(ubar0) must be negative for a boundary layer");
  return (model.bc_data(t) - model.bc_u * ubar0 - model.bc_v * model.flux(ubar0)) / model.bc_u;
}

double default_layer_horizon(const JinXinModel& model, double ubar0) {
  return 50.0 / std::abs(model.flux_derivative(ubar0));
}

std::vector<double> jinxin_layer_profile(const JinXinModel& model, double ubar0, double mu0, double y_max,
                                         int steps) {
  if (!(model.flux_derivative(ubar0) < 0.0))
    throw InvalidArgument("jinxin_layer_profile: f'(ubar0) must be negative for a boundary layer");
  if (steps < 1 || !(y_max > 0.0)) throw InvalidArgument("jinxin_layer_profile: need y_max > 0 and steps >= 1");
  const double f0 = model.flux(ubar0);
  const auto rhs = [&](double mu) { return model.flux(ubar0 + mu) - f0; };
  const double dy = y_max / steps;
  std::vector<double> mu(static_cast<std::size_t>(steps) + 1);
  mu[0] = mu0;
  for (int k = 0; k < steps; ++k) {
    const double m = mu[k];
    const double k1 = rhs(m);
    const double k2 = rhs(m + 0.5 * dy * k1);
    const double k3 = rhs(m + 0.5 * dy * k2);
    const double k4 = rhs(m + dy * k3);
    mu[k + 1] = m + dy / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(mu[k + 1]) || std::abs(mu[k + 1]) > std::abs(m) * (1.0 + 1e-12) + 1e-300) {
      std::ostringstream os;
      os << "jinxin_layer_profile: |mu| grows at y = " << (k + 1) * dy << "; layer datum " << mu0
         << " is not admissible";
      throw NumericalFailure(os.str());
    }
  }
  return mu;
}

Vector ReducedBCSystem::rhs(double t, const Vector& alpha_minus) const {
  if (alpha_minus.size() != r_minus_1.cols()) throw InvalidArgument("ReducedBCSystem: alpha- has the wrong size");
  const Vector b = bc_data(t);
  const Vector corr = b_u * (r_minus_1 * alpha_minus);
  Vector out(matrix.rows(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] - corr[i];
  return out;
}

ReducedBCSolution ReducedBCSystem::solve(double t, const Vector& alpha_minus) const {
  const Vector x = solve_dense(matrix, rhs(t, alpha_minus));
  ReducedBCSolution s;
  s.alpha_plus.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_alpha_plus));
  s.nu.assign(x.begin() + static_cast<std::ptrdiff_t>(n_alpha_plus), x.end());
  s.ubar0 = r_plus_1 * s.alpha_plus;
  const Vector back = r_minus_1 * alpha_minus;
  for (std::size_t i = 0; i < back.size(); ++i) s.ubar0[i] += back[i];
  s.mu0 = a11_inv_a12 * s.nu;
  for (double& m : s.mu0) m = -m;
  return s;
}

ReducedBCSystem reduced_bc_build(const LinearRelaxationSystem& sys, const DerivedStructure& derived) {
  const std::size_t m = sys.n - sys.r;
  const std::size_t np = sys.b.rows();
  ReducedBCSystem rs;
  rs.r = sys.r;
  rs.b_u = sys.b.block(0, 0, np, m);
  const Matrix b_v = sys.b.block(0, m, np, sys.r);
  rs.r_plus_1 = derived.split_a11.r_plus;
  rs.r_minus_1 = derived.split_a11.r_minus;
  rs.a11_inv_a12 = derived.a11_inv_a12;
  rs.n_alpha_plus = rs.r_plus_1.cols();
  rs.bc_data = sys.bc_data;
  const Matrix& lh = derived.split_h.l_plus;
  const std::size_t rows = np + lh.rows();
  const std::size_t cols = rs.n_alpha_plus + sys.r;
  if (rows != cols) {
    std::ostringstream os;
    os << "reduced_bc_build: reduced system is " << rows << " x " << cols;
    throw InvalidArgument(os.str());
  }
  rs.matrix = Matrix(rows, cols);
  rs.matrix.set_block(0, 0, rs.b_u * rs.r_plus_1);
  rs.matrix.set_block(0, rs.n_alpha_plus, b_v - rs.b_u * derived.a11_inv_a12);
  if (lh.rows() > 0) rs.matrix.set_block(np, rs.n_alpha_plus, lh);
  try {
    LuFactorization<double> lu(rs.matrix);
  } catch (const SingularMatrix&) {
    throw SingularMatrix("reduced_bc_build: reduced boundary system is singular (GKC violation suspected)");
  }
  return rs;
}

GridFunction asymptotic_limit_on_grid(const std::vector<double>& ubar, double mu0, const ScalarFn& f) {
  GridFunction g(ubar.size(), 2);
  for (std::size_t j = 0; j < ubar.size(); ++j) {
    g(j, 0) = ubar[j] + (j == 0 ? mu0 : 0.0);
    g(j, 1) = f(ubar[j]);
  }
  return g;
}

GridFunction asymptotic_limit_on_grid(const GridFunction& ubar, const Vector& nu0, const Matrix& a11_inv_a12) {
  const std::size_t m = ubar.components();
  const std::size_t r = nu0.size();
  GridFunction g(ubar.num_points(), m + r);
  const Vector k = a11_inv_a12 * nu0;
  for (std::size_t j = 0; j < ubar.num_points(); ++j)
    for (std::size_t c = 0; c < m; ++c) g(j, c) = ubar(j, c) - (j == 0 ? k[c] : 0.0);
  for (std::size_t c = 0; c < r; ++c) g(0, m + c) = nu0[c];
  return g;
}

namespace {

std::size_t refinement_factor(double coarse_h, double fine_h) {
  const double ratio = coarse_h / fine_h;
  const double k = std::round(ratio);
  if (k < 1.0 || std::abs(ratio - k) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "grids are not nested: coarse h / fine h = " << ratio;
    throw InvalidArgument(os.str());
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

Grid1D nested_fine_grid(const Grid1D& coarse, double h_fine) {
  const std::size_t k = refinement_factor(coarse.h, h_fine);
  return Grid1D{coarse.x0, coarse.h / static_cast<double>(k), (coarse.num_points - 1) * k + 1};
}

GridFunction restrict_to(const GridFunction& fine, const Grid1D& fine_grid, const Grid1D& coarse) {
  if (fine.num_points() != fine_grid.num_points) throw InvalidArgument("restrict_to: data does not match the fine grid");
  const std::size_t k = refinement_factor(coarse.h, fine_grid.h);
  const double shift = (coarse.x0 - fine_grid.x0) / fine_grid.h;
  const double s = std::round(shift);
  if (std::abs(shift - s) > 1e-9 * std::max(1.0, std::abs(shift)) || s < 0.0)
    throw InvalidArgument("restrict_to: coarse grid points do not coincide with fine grid points");
  const std::size_t off = static_cast<std::size_t>(s);
  if (off + (coarse.num_points - 1) * k >= fine.num_points())
    throw InvalidArgument("restrict_to: coarse grid extends beyond the fine grid");
  GridFunction out(coarse.num_points, fine.components());
  for (std::size_t j = 0; j < coarse.num_points; ++j)
    for (std::size_t c = 0; c < fine.components(); ++c) out(j, c) = fine(off + j * k, c);
  return out;
}

GridFunction fine_mesh_reference(const std::function<GridFunction(const Grid1D&)>& solve_fine,
                                 const Grid1D& coarse, double h_fine, double eps_min) {
  if (eps_min > 0.0 && !(h_fine < eps_min)) {
    std::ostringstream os;
    os << "fine_mesh_reference: h_fine = " << h_fine << " does not resolve eps = " << eps_min;
    throw InvalidArgument(os.str());
  }
  const Grid1D fine = nested_fine_grid(coarse, h_fine);
  return restrict_to(solve_fine(fine), fine, coarse);
}

}  // namespace relaxbl
