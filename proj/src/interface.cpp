#include "relaxbl/interface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jinxin_point.hpp"

namespace relaxbl {

PiecewiseEpsilon PiecewiseEpsilon::constant(double eps) { return {{}, {eps}}; }

PiecewiseEpsilon PiecewiseEpsilon::jump(double at, double eps_left, double eps_right) {
  return {{at}, {eps_left, eps_right}};
}

void PiecewiseEpsilon::validate() const {
  if (values.size() != breakpoints.size() + 1)
    throw InvalidArgument("PiecewiseEpsilon: need exactly one more value than breakpoints");
  for (double v : values)
    if (!(v > 0.0)) throw InvalidArgument("PiecewiseEpsilon: values must be positive");
  for (std::size_t k = 1; k < breakpoints.size(); ++k)
    if (!(breakpoints[k] > breakpoints[k - 1]))
      throw InvalidArgument("PiecewiseEpsilon: breakpoints must be strictly increasing");
}

double PiecewiseEpsilon::operator()(double x) const { return epsilon_limits(*this, x).second; }

double PiecewiseEpsilon::min_value() const { return *std::min_element(values.begin(), values.end()); }

std::pair<double, double> epsilon_limits(const PiecewiseEpsilon& eps, double x) {
  eps.validate();
  const auto& b = eps.breakpoints;
  const auto left = std::lower_bound(b.begin(), b.end(), x) - b.begin();   // breakpoints < x
  const auto right = std::upper_bound(b.begin(), b.end(), x) - b.begin();  // breakpoints <= x
  return {eps.values[static_cast<std::size_t>(left)], eps.values[static_cast<std::size_t>(right)]};
}

InterfaceGrid InterfaceGrid::build(const Grid1D& grid, const PiecewiseEpsilon& eps) {
  grid.validate();
  eps.validate();
  InterfaceGrid ig;
  ig.grid = grid;
  std::vector<double> snapped;
  for (double b : eps.breakpoints) {
    const double pos = (b - grid.x0) / grid.h;
    const double k = std::round(pos);
    if (std::abs(pos - k) > 1e-9 * std::max(1.0, std::abs(pos))) {
      std::ostringstream os;
      os << "breakpoint " << b << " is not a grid point; snapped to x = " << grid.x0 + k * grid.h;
      ig.warnings.push_back(os.str());
    }
    snapped.push_back(k);
  }
  ig.eps_left.resize(grid.num_points);
  ig.eps_right.resize(grid.num_points);
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    const double jd = static_cast<double>(j);
    std::size_t below = 0, at_or_below = 0;
    for (double s : snapped) {
      if (s < jd) ++below;
      if (s <= jd) ++at_or_below;
    }
    ig.eps_left[j] = eps.values[below];
    ig.eps_right[j] = eps.values[at_or_below];
  }
  return ig;
}

std::vector<std::size_t> InterfaceGrid::interface_points() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < eps_left.size(); ++j)
    if (eps_left[j] != eps_right[j]) out.push_back(j);
  return out;
}

namespace {

const SpectralSplit& pick_split(const LinearRelaxationSystem& sys, const DerivedStructure& d, double eps, double tau,
                                const SchemeConfig& cfg, SpectralSplit& storage) {
  if (switch_rule_for_linear(cfg) == SwitchRule::hard_tau_eps) return eps > tau ? d.split_a : d.split_inf;
  const double eta = effective_eta(tau, eps, cfg.p_exponent);
  if (std::isinf(eta)) return d.split_inf;
  storage = m_eta_split(sys, eta);
  return storage;
}

double jinxin_side_eta(double eps, double tau, const SchemeConfig& cfg) {
  if (switch_rule_for_jinxin(cfg) == SwitchRule::hard_tau_eps)
    return eps > tau ? 0.0 : std::numeric_limits<double>::infinity();
  return effective_eta(tau, eps, cfg.p_exponent);
}

void check_interface_cfl(double tau, double speed, const Grid1D& grid, const SchemeConfig& cfg) {
  if (!(tau > 0.0)) throw InvalidArgument("time step must be positive");
  if (tau * speed > cfg.cfl * grid.h * (1.0 + 1e-8)) {
    std::ostringstream os;
    os << "CFL violation: tau * max speed = " << tau * speed << " exceeds cfl * h = " << cfg.cfl * grid.h;
    throw InvalidArgument(os.str());
  }
}

void check_state(const SolutionState& s, const InterfaceGrid& ig, std::size_t comps) {
  if (s.values.num_points() != ig.grid.num_points || s.values.components() != comps)
    throw InvalidArgument("state does not match the interface grid or the number of components");
}

// Domain edges: zero-order extrapolation, or the exact right state when
// configured and available.
void close_edges(GridFunction& V, const VectorFn& right_state, double t, const SchemeConfig& cfg) {
  const std::size_t n = V.num_points();
  const std::size_t c = V.components();
  for (std::size_t k = 0; k < c; ++k) V(0, k) = V(1, k);
  if (cfg.right_boundary == RightBoundary::reference_dirichlet && right_state) {
    const Vector r = right_state(t);
    if (r.size() != c) throw InvalidArgument("right_state has the wrong number of components");
    for (std::size_t k = 0; k < c; ++k) V(n - 1, k) = r[k];
  } else {
    for (std::size_t k = 0; k < c; ++k) V(n - 1, k) = V(n - 2, k);
  }
}

}  // namespace

InterfaceOperators select_operators(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                                    double eps_left, double eps_right, double tau, const SchemeConfig& config) {
  SpectralSplit sr, sl;
  InterfaceOperators ops;
  ops.l_minus_right = pick_split(sys, derived, eps_right, tau, config, sr).l_minus;
  ops.l_plus_left = pick_split(sys, derived, eps_left, tau, config, sl).l_plus;
  return ops;
}

JinXinInterfaceOperators select_operators(double a, double eps_left, double eps_right, double tau,
                                          const SchemeConfig& config) {
  JinXinInterfaceOperators ops;
  ops.l_minus_right = m_eta_decompose(a, jinxin_side_eta(eps_right, tau, config)).l_minus;
  ops.l_plus_left = m_eta_decompose(a, jinxin_side_eta(eps_left, tau, config)).l_plus;
  return ops;
}

LinearInterfaceStepper::LinearInterfaceStepper(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                                               const InterfaceGrid& igrid, double tau, const SchemeConfig& config)
    : sys_(sys), igrid_(igrid), tau_(tau), config_(config) {
  config.validate();
  check_interface_cfl(tau, max_speed(sys.a), igrid.grid, config);
  const std::size_t n = sys.n;
  const double lam = tau / igrid.grid.h;
  const Matrix a_inv = inverse(sys.a);
  const Matrix id = Matrix::identity(n);
  for (std::size_t j = 0; j < igrid.grid.num_points; ++j) {
    const std::pair<double, double> key{igrid.eps_left[j], igrid.eps_right[j]};
    if (systems_.count(key)) continue;
    const InterfaceOperators ops = select_operators(sys, derived, key.first, key.second, tau, config);
    const Matrix rs = ops.l_minus_right * a_inv;
    const Matrix ls = ops.l_plus_left * a_inv;
    const Matrix k = vstack(rs * (id - sys.q * (tau / key.second)), ls * (id - sys.q * (tau / key.first)));
    if (k.rows() != n) throw InvalidArgument("interface: selected operators do not give a square point system");
    try {
      systems_.emplace(key, PointSystem{rs, ops.l_minus_right * lam, ls, ops.l_plus_left * lam, LuFactorization<double>(k)});
    } catch (const SingularMatrix&) {
      std::ostringstream os;
      os << "interface: point system singular for eps_left = " << key.first << ", eps_right = " << key.second;
      throw SingularMatrix(os.str());
    }
  }
}

SolutionState LinearInterfaceStepper::step(const SolutionState& state) const {
  const std::size_t n = sys_.n;
  const std::size_t np = igrid_.grid.num_points;
  check_state(state, igrid_, n);
  const GridFunction& U = state.values;
  SolutionState out{state.time + tau_, GridFunction(np, n)};
  Vector rhs(n), dl(n), dr(n);
  for (std::size_t j = 1; j + 1 < np; ++j) {
    const PointSystem& ps = systems_.at({igrid_.eps_left[j], igrid_.eps_right[j]});
    for (std::size_t c = 0; c < n; ++c) {
      dl[c] = U(j, c) - U(j - 1, c);
      dr[c] = U(j + 1, c) - U(j, c);
    }
    const std::size_t nr = ps.right_state.rows();
    for (std::size_t i = 0; i < nr; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += ps.right_state(i, c) * U(j, c) - ps.right_diff(i, c) * dr[c];
      rhs[i] = acc;
    }
    for (std::size_t i = 0; i < ps.left_state.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += ps.left_state(i, c) * U(j, c) - ps.left_diff(i, c) * dl[c];
      rhs[nr + i] = acc;
    }
    ps.lu.solve_in_place(rhs);
    for (std::size_t c = 0; c < n; ++c) out.values(j, c) = rhs[c];
  }
  close_edges(out.values, sys_.right_state, out.time, config_);
  return out;
}

SolutionState interface_step(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                             const InterfaceGrid& igrid, const SolutionState& state, double tau,
                             const SchemeConfig& config) {
  return LinearInterfaceStepper(sys, derived, igrid, tau, config).step(state);
}

SolutionState interface_step(const JinXinModel& model, const InterfaceGrid& igrid, const SolutionState& state,
                             double tau, const SchemeConfig& config) {
  config.validate();
  check_state(state, igrid, 2);
  check_interface_cfl(tau, 1.0, igrid.grid, config);
  const GridFunction& U = state.values;
  const std::size_t np = igrid.grid.num_points;
  const double lam = tau / igrid.grid.h;
  const double t1 = state.time + tau;
  SolutionState out{t1, GridFunction(np, 2)};
  for (std::size_t j = 1; j + 1 < np; ++j) {
    const double a = detail::resolve_a(model, U, j, config);
    const JinXinInterfaceOperators ops = select_operators(a, igrid.eps_left[j], igrid.eps_right[j], tau, config);
    const double g = tau * model.forcing_at(igrid.grid.x(j), t1);
    const auto row = [&](const std::array<double, 2>& l, double eps, double d0, double d1) {
      const double w1 = l[1], w2 = l[0];  // l A^{-1}
      return detail::PointRow{w1, w2, tau / eps, w1 * U(j, 0) + w2 * U(j, 1) - lam * (l[0] * d0 + l[1] * d1) + w2 * g};
    };
    const detail::PointRow right = row(ops.l_minus_right, igrid.eps_right[j], U(j + 1, 0) - U(j, 0), U(j + 1, 1) - U(j, 1));
    const detail::PointRow left = row(ops.l_plus_left, igrid.eps_left[j], U(j, 0) - U(j - 1, 0), U(j, 1) - U(j - 1, 1));
    const auto sol = detail::solve_point({right, left}, model.flux, model.flux_derivative, {U(j, 0), U(j, 1)},
                                         config.newton_tol, config.newton_max_iters);
    out.values(j, 0) = sol[0];
    out.values(j, 1) = sol[1];
  }
  close_edges(out.values, model.right_state, t1, config);
  return out;
}

SolutionState interface_upwind_step(const LinearRelaxationSystem& sys, const SpectralSplit& split_a,
                                    const InterfaceGrid& igrid, const SolutionState& state, double tau,
                                    const SchemeConfig& config) {
  config.validate();
  check_state(state, igrid, sys.n);
  check_interface_cfl(tau, max_speed(sys.a), igrid.grid, config);
  const std::size_t n = sys.n;
  const std::size_t np = igrid.grid.num_points;
  const double lam = tau / igrid.grid.h;
  const Matrix ap = sys.a * split_a.projector_plus();
  const Matrix am = sys.a * split_a.projector_minus();
  std::map<double, Matrix> implicit_inv;
  const GridFunction& U = state.values;
  SolutionState out{state.time + tau, GridFunction(np, n)};
  Vector rhs(n);
  for (std::size_t j = 1; j + 1 < np; ++j) {
    const double eps = igrid.eps_right[j];
    auto it = implicit_inv.find(eps);
    if (it == implicit_inv.end())
      it = implicit_inv.emplace(eps, inverse(Matrix::identity(n) - sys.q * (tau / eps))).first;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c)
        acc += ap(i, c) * (U(j, c) - U(j - 1, c)) + am(i, c) * (U(j + 1, c) - U(j, c));
      rhs[i] = U(j, i) - lam * acc;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += it->second(i, c) * rhs[c];
      out.values(j, i) = acc;
    }
  }
  close_edges(out.values, sys.right_state, out.time, config);
  return out;
}

SolutionState interface_upwind_step(const JinXinModel& model, const InterfaceGrid& igrid, const SolutionState& state,
                                    double tau, const SchemeConfig& config) {
  config.validate();
  check_state(state, igrid, 2);
  check_interface_cfl(tau, 1.0, igrid.grid, config);
  const GridFunction& U = state.values;
  const std::size_t np = igrid.grid.num_points;
  const double lam = tau / igrid.grid.h;
  const double t1 = state.time + tau;
  SolutionState out{t1, GridFunction(np, 2)};
  for (std::size_t j = 1; j + 1 < np; ++j) {
    const double kappa = tau / igrid.eps_right[j];
    const double dl0 = U(j, 0) - U(j - 1, 0), dl1 = U(j, 1) - U(j - 1, 1);
    const double dr0 = U(j + 1, 0) - U(j, 0), dr1 = U(j + 1, 1) - U(j, 1);
    // A+ = [[1, 1], [1, 1]] / 2, A- = [[-1, 1], [1, -1]] / 2
    const double us = U(j, 0) - lam * 0.5 * (dl0 + dl1 - dr0 + dr1);
    const double vs = U(j, 1) - lam * 0.5 * (dl0 + dl1 + dr0 - dr1);
    out.values(j, 0) = us;
    out.values(j, 1) = (vs + kappa * model.flux(us) + tau * model.forcing_at(igrid.grid.x(j), t1)) / (1.0 + kappa);
  }
  close_edges(out.values, model.right_state, t1, config);
  return out;
}

Trajectory run_interface(const LinearRelaxationSystem& sys, Scheme scheme, const InterfaceGrid& igrid,
                         const RunOptions& opts, const SchemeConfig& config) {
  config.validate();
  const double tau = choose_time_step(igrid.grid, max_speed(sys.a), opts, config);
  if (scheme == Scheme::upwind) {
    const SpectralSplit split_a = spectral_split(sys.a);
    return march(linear_initial_state(sys, igrid.grid), tau, opts, [&](const SolutionState& s, double dt) {
      return interface_upwind_step(sys, split_a, igrid, s, dt, config);
    });
  }
  const DerivedStructure derived = derive_structure(sys);
  std::map<double, LinearInterfaceStepper> steppers;
  return march(linear_initial_state(sys, igrid.grid), tau, opts, [&](const SolutionState& s, double dt) {
    auto it = steppers.find(dt);
    if (it == steppers.end()) it = steppers.emplace(dt, LinearInterfaceStepper(sys, derived, igrid, dt, config)).first;
    return it->second.step(s);
  });
}

Trajectory run_interface(const JinXinModel& model, Scheme scheme, const InterfaceGrid& igrid, const RunOptions& opts,
                         const SchemeConfig& config) {
  config.validate();
  if (!model.flux || !model.flux_derivative || !model.init_u || !model.init_v)
    throw InvalidArgument("run_interface: model needs flux, flux_derivative and initial data");
  const double tau = choose_time_step(igrid.grid, 1.0, opts, config);
  return march(jinxin_initial_state(model, igrid.grid), tau, opts, [&](const SolutionState& s, double dt) {
    return scheme == Scheme::bap ? interface_step(model, igrid, s, dt, config)
                                 : interface_upwind_step(model, igrid, s, dt, config);
  });
}

}  // namespace relaxbl
