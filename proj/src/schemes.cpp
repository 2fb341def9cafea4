#include "relaxbl/schemes.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "jinxin_point.hpp"

namespace relaxbl {

EtaDecomposition m_eta_decompose(double a, double eta) {
  if (a == 0.0 || !std::isfinite(a)) throw DegenerateSign("m_eta_decompose: a must be nonzero and finite");
  if (!(eta >= 0.0)) throw InvalidArgument("m_eta_decompose: eta must be non-negative");
  EtaDecomposition d;
  d.a = a;
  d.eta = eta;
  // rho = lambda / (1 + eta), so that l is proportional to (rho, 1).
  double rho_p = 0.0, rho_m = 0.0;
  if (eta <= 1.0) {
    const double s = std::sqrt(a * a * eta * eta + 4.0 * (eta + 1.0));
    if (a < 0.0) {
      d.lambda_plus = 0.5 * (-a * eta + s);
      d.lambda_minus = -(1.0 + eta) / d.lambda_plus;
    } else {
      d.lambda_minus = -0.5 * (a * eta + s);
      d.lambda_plus = -(1.0 + eta) / d.lambda_minus;
    }
    rho_p = d.lambda_plus / (1.0 + eta);
    rho_m = d.lambda_minus / (1.0 + eta);
  } else {
    // Rescaled by 1/eta: the large root is eta * beta, the small one is
    // -(1 + 1/eta) / beta.
    const double e = std::isinf(eta) ? 0.0 : 1.0 / eta;
    const double mag = 0.5 * (std::abs(a) + std::sqrt(a * a + 4.0 * (e + e * e)));
    const double beta = a < 0.0 ? mag : -mag;
    const double big = std::isinf(eta) ? std::copysign(std::numeric_limits<double>::infinity(), beta) : eta * beta;
    const double small = -(1.0 + e) / beta;
    const double rho_big = beta / (1.0 + e);
    const double rho_small = -e / beta;
    if (a < 0.0) {
      d.lambda_plus = big;
      d.lambda_minus = small;
      rho_p = rho_big;
      rho_m = rho_small;
    } else {
      d.lambda_minus = big;
      d.lambda_plus = small;
      rho_m = rho_big;
      rho_p = rho_small;
    }
  }
  const double np = std::hypot(rho_p, 1.0);
  const double nm = std::hypot(rho_m, 1.0);
  d.l_plus = {rho_p / np, 1.0 / np};
  d.l_minus = {rho_m / nm, 1.0 / nm};
  const double det = d.l_plus[0] * d.l_minus[1] - d.l_plus[1] * d.l_minus[0];
  d.r_plus = {d.l_minus[1] / det, -d.l_minus[0] / det};
  d.r_minus = {-d.l_plus[1] / det, d.l_plus[0] / det};
  return d;
}

double effective_eta(double tau, double eps, int p) {
  const double ratio = tau / eps;
  if (ratio > kEtaLimitRatio) return std::numeric_limits<double>::infinity();
  return std::pow(ratio, p);
}

SwitchRule switch_rule_for_jinxin(const SchemeConfig& cfg) { return cfg.switch_rule.value_or(SwitchRule::smooth_eta); }
SwitchRule switch_rule_for_linear(const SchemeConfig& cfg) {
  return cfg.switch_rule.value_or(SwitchRule::hard_tau_eps);
}

double max_speed(const Matrix& a) {
  double s = 0.0;
  for (const auto& p : eigen_small(a)) s = std::max(s, std::abs(p.eigenvalue));
  return s;
}

double choose_time_step(const Grid1D& grid, double speed, const RunOptions& opts, const SchemeConfig& cfg) {
  if (opts.dt) {
    if (!(*opts.dt > 0.0)) throw InvalidArgument("time step override must be positive");
    return *opts.dt;
  }
  if (!(speed > 0.0)) throw InvalidArgument("maximum characteristic speed must be positive");
  return cfg.cfl * grid.h / speed;
}

namespace {

void check_cfl(double tau, double speed, const Grid1D& grid, const SchemeConfig& cfg) {
  if (!(tau > 0.0)) throw InvalidArgument("time step must be positive");
  if (tau * speed > cfg.cfl * grid.h * (1.0 + 1e-8)) {
    std::ostringstream os;
    os << "CFL violation: tau * max speed = " << tau * speed << " exceeds cfl * h = " << cfg.cfl * grid.h;
    throw InvalidArgument(os.str());
  }
}

void check_state(const SolutionState& s, const Grid1D& grid, std::size_t comps) {
  if (s.values.num_points() != grid.num_points || s.values.components() != comps)
    throw InvalidArgument("state does not match the grid or the number of components");
}

// ---- Jin-Xin ----

struct Split2 {
  double p[2][2];  // A r+ l+
  double m[2][2];  // A r- l-
};

Split2 split_from(const EtaDecomposition& d) {
  Split2 s{};
  for (int k = 0; k < 2; ++k) {
    // A = [[0, 1], [1, 0]] swaps the rows of r l.
    s.p[0][k] = d.r_plus[1] * d.l_plus[k];
    s.p[1][k] = d.r_plus[0] * d.l_plus[k];
    s.m[0][k] = d.r_minus[1] * d.l_minus[k];
    s.m[1][k] = d.r_minus[0] * d.l_minus[k];
  }
  return s;
}

constexpr Split2 kUpwindSplit{{{0.5, 0.5}, {0.5, 0.5}}, {{-0.5, 0.5}, {0.5, -0.5}}};

double jinxin_eta(double tau, double eps, const SchemeConfig& cfg) {
  if (switch_rule_for_jinxin(cfg) == SwitchRule::hard_tau_eps)
    return tau < eps ? 0.0 : std::numeric_limits<double>::infinity();
  return effective_eta(tau, eps, cfg.p_exponent);
}

SolutionState jinxin_step(const JinXinModel& model, const Grid1D& grid, const SolutionState& state, double tau,
                          const SchemeConfig& cfg, Scheme scheme) {
  grid.validate();
  cfg.validate();
  check_state(state, grid, 2);
  check_cfl(tau, 1.0, grid, cfg);
  const GridFunction& U = state.values;
  const std::size_t n = grid.num_points;
  const double lam = tau / grid.h;
  const double kappa = tau / model.epsilon;
  const double t1 = state.time + tau;
  const double eta = scheme == Scheme::bap ? jinxin_eta(tau, model.epsilon, cfg) : 0.0;

  SolutionState out{t1, GridFunction(n, 2)};
  GridFunction& V = out.values;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const Split2 sp =
        scheme == Scheme::bap ? split_from(m_eta_decompose(detail::resolve_a(model, U, j, cfg), eta)) : kUpwindSplit;
    const double dl0 = U(j, 0) - U(j - 1, 0), dl1 = U(j, 1) - U(j - 1, 1);
    const double dr0 = U(j + 1, 0) - U(j, 0), dr1 = U(j + 1, 1) - U(j, 1);
    const double us = U(j, 0) - lam * (sp.p[0][0] * dl0 + sp.p[0][1] * dl1 + sp.m[0][0] * dr0 + sp.m[0][1] * dr1);
    const double vs = U(j, 1) - lam * (sp.p[1][0] * dl0 + sp.p[1][1] * dl1 + sp.m[1][0] * dr0 + sp.m[1][1] * dr1);
    V(j, 0) = us;
    V(j, 1) = (vs + kappa * model.flux(us) + tau * model.forcing_at(grid.x(j), t1)) / (1.0 + kappa);
  }

  // Left boundary: outgoing characteristic row with implicit source, plus the
  // boundary condition.
  std::array<double, 2> l{-1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  if (scheme == Scheme::bap) l = m_eta_decompose(detail::resolve_a(model, U, 0, cfg), eta).l_minus;
  const double w1 = l[1], w2 = l[0];  // l A^{-1}
  detail::PointRow char_row{w1, w2, kappa,
                            w1 * U(0, 0) + w2 * U(0, 1) - lam * (l[0] * (U(1, 0) - U(0, 0)) + l[1] * (U(1, 1) - U(0, 1))) +
                                w2 * tau * model.forcing_at(grid.x(0), t1)};
  detail::PointRow bc_row{model.bc_u, model.bc_v, 0.0, model.bc_data(t1)};
  const auto u0 = detail::solve_point({char_row, bc_row}, model.flux, model.flux_derivative, {U(0, 0), U(0, 1)},
                                      cfg.newton_tol, cfg.newton_max_iters);
  V(0, 0) = u0[0];
  V(0, 1) = u0[1];

  if (cfg.right_boundary == RightBoundary::reference_dirichlet) {
    if (!model.right_state) throw InvalidArgument("reference_dirichlet closure needs model.right_state");
    const Vector r = model.right_state(t1);
    if (r.size() != 2) throw InvalidArgument("right_state must return 2 components");
    V(n - 1, 0) = r[0];
    V(n - 1, 1) = r[1];
  } else {
    V(n - 1, 0) = V(n - 2, 0);
    V(n - 1, 1) = V(n - 2, 1);
  }
  return out;
}

}  // namespace

SolutionState jinxin_initial_state(const JinXinModel& model, const Grid1D& grid) {
  SolutionState s{0.0, GridFunction(grid.num_points, 2)};
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    s.values(j, 0) = model.init_u(grid.x(j));
    s.values(j, 1) = model.init_v(grid.x(j));
  }
  return s;
}

SolutionState jinxin_upwind_step(const JinXinModel& model, const Grid1D& grid, const SolutionState& state,
                                 double tau, const SchemeConfig& config) {
  return jinxin_step(model, grid, state, tau, config, Scheme::upwind);
}

SolutionState jinxin_bap_step(const JinXinModel& model, const Grid1D& grid, const SolutionState& state,
                              double tau, const SchemeConfig& config) {
  return jinxin_step(model, grid, state, tau, config, Scheme::bap);
}

// ---- linear systems ----

SolutionState linear_initial_state(const LinearRelaxationSystem& sys, const Grid1D& grid) {
  if (!sys.init) throw InvalidArgument("linear system has no initial data");
  SolutionState s{0.0, GridFunction(grid.num_points, sys.n)};
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    const Vector u = sys.init(grid.x(j));
    if (u.size() != sys.n) throw InvalidArgument("initial data has the wrong number of components");
    for (std::size_t c = 0; c < sys.n; ++c) s.values(j, c) = u[c];
  }
  return s;
}

LinearStepper::LinearStepper(const LinearRelaxationSystem& sys, const SpectralSplit& split, BoundaryForm form,
                             const Grid1D& grid, double tau, const SchemeConfig& config)
    : sys_(sys), grid_(grid), tau_(tau), lambda_(tau / grid.h), config_(config) {
  grid.validate();
  config.validate();
  check_cfl(tau, max_speed(sys.a), grid, config);
  const std::size_t n = sys.n;
  if (split.n_minus() + sys.b.rows() != n) {
    std::ostringstream os;
    os << "boundary system is not square: " << split.n_minus() << " outgoing rows + " << sys.b.rows()
       << " boundary conditions for " << n << " unknowns";
    throw InvalidArgument(os.str());
  }
  a_plus_ = sys.a * split.projector_plus();
  a_minus_ = sys.a * split.projector_minus();
  const double kappa = tau / sys.epsilon;
  const Matrix implicit = Matrix::identity(n) - sys.q * kappa;
  implicit_inv_ = inverse(implicit);
  if (form == BoundaryForm::upwind) {
    bnd_state_rows_ = split.l_minus;
    bnd_diff_rows_ = split.l_minus * sys.a * lambda_;
  } else {
    bnd_state_rows_ = split.l_minus * inverse(sys.a);
    bnd_diff_rows_ = split.l_minus * lambda_;
  }
  bnd_lu_.emplace(vstack(bnd_state_rows_ * implicit, sys.b));
}

SolutionState LinearStepper::step(const SolutionState& state) const {
  const std::size_t n = sys_.n;
  const std::size_t np = grid_.num_points;
  check_state(state, grid_, n);
  const GridFunction& U = state.values;
  const double t1 = state.time + tau_;
  SolutionState out{t1, GridFunction(np, n)};
  GridFunction& V = out.values;
  Vector dl(n), dr(n), rhs(n);
  for (std::size_t j = 1; j + 1 < np; ++j) {
    for (std::size_t c = 0; c < n; ++c) {
      dl[c] = U(j, c) - U(j - 1, c);
      dr[c] = U(j + 1, c) - U(j, c);
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += a_plus_(i, c) * dl[c] + a_minus_(i, c) * dr[c];
      rhs[i] = U(j, i) - lambda_ * acc;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += implicit_inv_(i, c) * rhs[c];
      V(j, i) = acc;
    }
  }

  const std::size_t nm = bnd_state_rows_.rows();
  Vector b(n);
  for (std::size_t i = 0; i < nm; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < n; ++c)
      acc += bnd_state_rows_(i, c) * U(0, c) - bnd_diff_rows_(i, c) * (U(1, c) - U(0, c));
    b[i] = acc;
  }
  if (sys_.b.rows() > 0) {
    if (!sys_.bc_data) throw InvalidArgument("linear system has no boundary data");
    const Vector g = sys_.bc_data(t1);
    if (g.size() != sys_.b.rows()) throw InvalidArgument("boundary data has the wrong number of components");
    for (std::size_t i = 0; i < g.size(); ++i) b[nm + i] = g[i];
  }
  bnd_lu_->solve_in_place(b);
  for (std::size_t c = 0; c < n; ++c) V(0, c) = b[c];

  if (config_.right_boundary == RightBoundary::reference_dirichlet) {
    if (!sys_.right_state) throw InvalidArgument("reference_dirichlet closure needs right_state");
    const Vector r = sys_.right_state(t1);
    if (r.size() != n) throw InvalidArgument("right_state has the wrong number of components");
    for (std::size_t c = 0; c < n; ++c) V(np - 1, c) = r[c];
  } else {
    for (std::size_t c = 0; c < n; ++c) V(np - 1, c) = V(np - 2, c);
  }
  return out;
}

SpectralSplit linear_bap_split(const LinearRelaxationSystem& sys, const DerivedStructure& derived, double tau,
                               double eps, const SchemeConfig& config) {
  if (switch_rule_for_linear(config) == SwitchRule::hard_tau_eps) return tau < eps ? derived.split_a : derived.split_inf;
  const double eta = effective_eta(tau, eps, config.p_exponent);
  if (std::isinf(eta)) return derived.split_inf;
  return m_eta_split(sys, eta);
}

namespace {

LinearStepper make_linear_stepper(const LinearRelaxationSystem& sys, const DerivedStructure* derived,
                                  const SpectralSplit& split_a, Scheme scheme, const Grid1D& grid, double tau,
                                  const SchemeConfig& cfg) {
  using Form = LinearStepper::BoundaryForm;
  if (scheme == Scheme::upwind) return LinearStepper(sys, split_a, Form::upwind, grid, tau, cfg);
  // In the non-stiff branch of the hard switch the scheme is exactly upwind.
  if (switch_rule_for_linear(cfg) == SwitchRule::hard_tau_eps && tau < sys.epsilon)
    return LinearStepper(sys, split_a, Form::upwind, grid, tau, cfg);
  return LinearStepper(sys, linear_bap_split(sys, *derived, tau, sys.epsilon, cfg), Form::bap, grid, tau, cfg);
}

}  // namespace

SolutionState linear_upwind_step(const LinearRelaxationSystem& sys, const SpectralSplit& split_a,
                                 const Grid1D& grid, const SolutionState& state, double tau,
                                 const SchemeConfig& config) {
  return make_linear_stepper(sys, nullptr, split_a, Scheme::upwind, grid, tau, config).step(state);
}

SolutionState linear_bap_step(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                              const Grid1D& grid, const SolutionState& state, double tau,
                              const SchemeConfig& config) {
  return make_linear_stepper(sys, &derived, derived.split_a, Scheme::bap, grid, tau, config).step(state);
}

// ---- drivers ----

Trajectory run_ibvp(const JinXinModel& model, Scheme scheme, const Grid1D& grid, const RunOptions& opts,
                    const SchemeConfig& config) {
  model.validate();
  grid.validate();
  config.validate();
  const double tau = choose_time_step(grid, 1.0, opts, config);
  return march(jinxin_initial_state(model, grid), tau, opts, [&](const SolutionState& s, double dt) {
    return scheme == Scheme::bap ? jinxin_bap_step(model, grid, s, dt, config)
                                 : jinxin_upwind_step(model, grid, s, dt, config);
  });
}

Trajectory run_ibvp(const LinearRelaxationSystem& sys, Scheme scheme, const Grid1D& grid, const RunOptions& opts,
                    const SchemeConfig& config) {
  const ValidationReport rep = validate(sys);
  if (!rep.ok()) throw InvalidArgument("linear system failed validation:\n" + rep.summary());
  grid.validate();
  config.validate();
  std::optional<DerivedStructure> derived;
  SpectralSplit split_a;
  if (scheme == Scheme::bap) {
    derived = derive_structure(sys);
    split_a = derived->split_a;
  } else {
    split_a = spectral_split(sys.a);
  }
  const double tau = choose_time_step(grid, max_speed(sys.a), opts, config);
  std::map<double, LinearStepper> steppers;
  return march(linear_initial_state(sys, grid), tau, opts, [&](const SolutionState& s, double dt) {
    auto it = steppers.find(dt);
    if (it == steppers.end())
      it = steppers
               .emplace(dt, make_linear_stepper(sys, derived ? &*derived : nullptr, split_a, scheme, grid, dt, config))
               .first;
    return it->second.step(s);
  });
}

}  // namespace relaxbl
