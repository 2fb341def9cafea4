#include "relaxbl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "relaxbl/reference.hpp"

namespace relaxbl::harness {

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double example2_flux(double u) { return 0.25 * (std::exp(-u) - 1.0); }
double example2_dflux(double u) { return -0.25 * std::exp(-u); }

}  // namespace

// ---- norms ------------------------------------------------------------------

ErrorNorms error_norms(const GridFunction& numeric, const GridFunction& reference, double h) {
  if (numeric.num_points() != reference.num_points() || numeric.components() != reference.components()) {
    std::ostringstream os;
    os << "error_norms: shape mismatch (" << numeric.num_points() << "x" << numeric.components() << " vs "
       << reference.num_points() << "x" << reference.components() << ")";
    throw InvalidArgument(os.str());
  }
  if (!(h > 0.0)) throw InvalidArgument("error_norms: h must be positive");
  ErrorNorms n;
  double sq = 0.0;
  for (std::size_t j = 0; j < numeric.num_points(); ++j) {
    double e = 0.0;
    for (std::size_t c = 0; c < numeric.components(); ++c) e += std::abs(numeric(j, c) - reference(j, c));
    n.l1 += e;
    sq += e * e;
    n.linf = std::max(n.linf, e);
  }
  n.l1 *= h;
  n.l2 = std::sqrt(h * sq);
  return n;
}

double fit_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size()) throw InvalidArgument("fit_slope: length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < h.size(); ++k)
    if (h[k] > 0.0 && err[k] > 0.0 && std::isfinite(err[k])) pts.emplace_back(std::log(h[k]), std::log(err[k]));
  if (pts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (auto [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

std::string to_string(ReferenceKind k) {
  switch (k) {
    case ReferenceKind::closed_form: return "closed_form";
    case ReferenceKind::fine_mesh: return "fine_mesh";
    case ReferenceKind::asymptotic_limit: return "asymptotic_limit";
  }
  return "?";
}

std::string to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::jinxin: return "jinxin";
    case ProblemKind::linear: return "linear";
    case ProblemKind::jinxin_interface: return "jinxin_interface";
    case ProblemKind::linear_interface: return "linear_interface";
  }
  return "?";
}

// ---- function registry ------------------------------------------------------

FunctionRegistry FunctionRegistry::with_builtins() {
  FunctionRegistry r;
  r.add("zero", [](double) { return 0.0; });
  r.add("one", [](double) { return 1.0; });
  r.add("half", [](double) { return 0.5; });
  r.add("identity", [](double x) { return x; });
  r.add("half_u_squared", [](double u) { return 0.5 * u * u; });
  r.add("sin", [](double x) { return std::sin(x); });
  r.add("neg_sin", [](double x) { return -std::sin(x); });
  r.add("two_sin", [](double x) { return 2.0 * std::sin(x); });
  r.add("sin_pi_x", [](double x) { return std::sin(kPi * x); });
  r.add("sin_cubed_pi_x", [](double x) { return std::pow(std::sin(kPi * x), 3); });
  r.add("sin_2t", [](double t) { return std::sin(2.0 * t); });
  r.add("sin_half_t_plus_sin_t", [](double t) { return std::sin(t / 2) + std::sin(t); });
  r.add("neg_three_sin_half_t", [](double t) { return -3.0 * std::sin(t / 2); });
  r.add("flux_neg_half_u", [](double u) { return -0.5 * u; });
  r.add("dflux_neg_half_u", [](double) { return -0.5; });
  r.add("flux_half_u", [](double u) { return 0.5 * u; });
  r.add("dflux_half_u", [](double) { return 0.5; });
  r.add("example2_flux", example2_flux);
  r.add("example2_flux_derivative", example2_dflux);
  return r;
}

void FunctionRegistry::add(const std::string& name, ScalarFn fn) {
  if (name.empty() || !fn) throw InvalidArgument("FunctionRegistry::add: empty name or function");
  fns_[name] = std::move(fn);
}

bool FunctionRegistry::contains(const std::string& name) const { return fns_.count(name) != 0; }

const ScalarFn& FunctionRegistry::get(const std::string& name) const {
  auto it = fns_.find(name);
  if (it == fns_.end()) throw InvalidArgument("unknown function name '" + name + "'");
  return it->second;
}

std::vector<std::string> FunctionRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : fns_) out.push_back(k);
  return out;
}

// ---- configs ----------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (example_id.empty() && !custom) throw InvalidArgument("config: either 'example' or 'problem' is required");
  if (!(right > left)) throw InvalidArgument("config field 'domain': right end must exceed left end");
  if (nx.empty()) throw InvalidArgument("config field 'nx': at least one resolution is required");
  for (std::size_t n : nx)
    if (n < 8) throw InvalidArgument("config field 'nx': every N_x must be at least 8");
  if (!(t_final > 0.0)) throw InvalidArgument("config field 't_final': must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidArgument("config field 'cfl': must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw InvalidArgument("config field 'epsilon': must be positive");
  if (p_exponent < 1) throw InvalidArgument("config field 'p': must be at least 1");
  if (dt && !(*dt > 0.0)) throw InvalidArgument("config field 'dt': must be positive");
  if (!(h_fine > 0.0)) throw InvalidArgument("config field 'h_fine': must be positive");
  for (double t : output_times)
    if (!(t > 0.0 && t <= t_final)) throw InvalidArgument("config field 'output_times': entries must lie in (0, t_final]");
}

SchemeConfig ExperimentConfig::scheme_config() const {
  SchemeConfig c;
  c.cfl = cfl;
  c.p_exponent = p_exponent;
  c.a_mode = a_mode;
  c.right_boundary = right_boundary;
  c.switch_rule = switch_rule;
  return c;
}

// ---- example registry -------------------------------------------------------

namespace {

ExperimentConfig base_config(const std::string& id, double left, double right, std::vector<std::size_t> nx,
                             double eps, int p, double t_final, ReferenceKind ref) {
  ExperimentConfig c;
  c.example_id = id;
  c.left = left;
  c.right = right;
  c.nx = std::move(nx);
  c.epsilon = eps;
  c.p_exponent = p;
  c.t_final = t_final;
  c.reference = ref;
  return c;
}

std::vector<ExampleInfo> make_registry() {
  std::vector<ExampleInfo> r;
  const std::vector<std::size_t> conv{50, 100, 200, 400, 800};
  {
    ExampleInfo e{"1a", "Linear Jin-Xin, f(u) = -u/2, boundary layer",
                  "a=-0.5, eps=1e-9, u0=2sin(x), v0=-sin(x), u+v=sin(t/2)+sin(t), x in [0,2], t=0.5, CFL=0.8, p=2",
                  "", ProblemKind::jinxin, base_config("1a", 0, 2, conv, 1e-9, 2, 0.5, ReferenceKind::closed_form)};
    e.defaults.right_boundary = RightBoundary::reference_dirichlet;
    r.push_back(e);
  }
  {
    ExampleInfo e{"1b", "Linear Jin-Xin, f(u) = u/2, no layer",
                  "a=0.5, eps=1e-9, u0=2sin(x), v0=sin(x), u+v=-3sin(t/2), x in [0,2], t=0.5, CFL=0.8, p=2", "",
                  ProblemKind::jinxin, base_config("1b", 0, 2, conv, 1e-9, 2, 0.5, ReferenceKind::closed_form)};
    e.defaults.right_boundary = RightBoundary::reference_dirichlet;
    r.push_back(e);
  }
  {
    ExampleInfo e{"1c", "Forced linear Jin-Xin, non-stiff",
                  "a=0.5, eps=1, forcing -1.5sin(x+t), u0=sin(x), v0=-sin(x), u+v=0, x in [0,2], t=0.5, CFL=0.8, p=2",
                  "", ProblemKind::jinxin, base_config("1c", 0, 2, conv, 1.0, 2, 0.5, ReferenceKind::closed_form)};
    e.defaults.right_boundary = RightBoundary::reference_dirichlet;
    r.push_back(e);
  }
  {
    ExampleInfo e{"2", "Nonlinear Jin-Xin, f(u) = (exp(-u)-1)/4",
                  "u0=sin^3(pi x), v0=f(u0), u+v=sin(2t), x in [0,1], N_x=800, tau=5e-4, eps=1e-6, p=2, t=0.2",
                  "reference: equilibrium solve on a 16x refined grid plus the boundary-layer amplitude",
                  ProblemKind::jinxin, base_config("2", 0, 1, {800}, 1e-6, 2, 0.2, ReferenceKind::asymptotic_limit)};
    e.defaults.dt = 5e-4;
    r.push_back(e);
  }
  {
    ExampleInfo e{"3", "Linear 3x3 relaxation system (u, v, p)",
                  "u(0,t)=-sin t, v+2p=0, u0=2sin(x), v0=p0=0, x in [0,0.5], N_x=100, tau=1e-3, eps=1e-6, t=0.3", "",
                  ProblemKind::linear, base_config("3", 0, 0.5, {100}, 1e-6, 2, 0.3, ReferenceKind::closed_form)};
    e.defaults.dt = 1e-3;
    e.defaults.right_boundary = RightBoundary::reference_dirichlet;
    r.push_back(e);
  }
  {
    ExampleInfo e{"4", "Jin-Xin interface, eps = 1 (x<0), eps0 (x>=0)",
                  "f(u)=(exp(-u)-1)/4, eps0=1e-4, u0=sin(pi x), v0=f(u0), x in [-1,1], N_x=100, p=4, t=0.4, "
                  "reference upwind h=5e-5",
                  "desk scale: eps0=1e-3, reference upwind h=1e-4",
                  ProblemKind::jinxin_interface,
                  base_config("4", -1, 1, {100}, 1e-3, 4, 0.4, ReferenceKind::fine_mesh)};
    r.push_back(e);
  }
  {
    ExampleInfo e{"5", "Linear 3x3 interface system, eps = 1 (x<0), eps0 (x>=0)",
                  "u0=sin(pi x), v0=p0=0, eps0=1e-6, x in [-1,1], N_x=2000, t=0.6, reference by domain decomposition",
                  "desk scale: eps0=1e-3, N_x=500, reference upwind h=1e-4", ProblemKind::linear_interface,
                  base_config("5", -1, 1, {500}, 1e-3, 2, 0.6, ReferenceKind::fine_mesh)};
    r.push_back(e);
  }
  return r;
}

}  // namespace

const std::vector<ExampleInfo>& example_registry() {
  static const std::vector<ExampleInfo> reg = make_registry();
  return reg;
}

const ExampleInfo& find_example(const std::string& id) {
  for (const auto& e : example_registry())
    if (e.id == id) return e;
  throw InvalidArgument("unknown example id '" + id + "' (see list-examples)");
}

ExperimentConfig example_config(const std::string& id) { return find_example(id).defaults; }

// ---- problem construction ---------------------------------------------------

namespace {

Problem build_example(const ExperimentConfig& cfg) {
  const std::string& id = cfg.example_id;
  Problem p;
  p.kind = find_example(id).kind;
  const double eps = cfg.epsilon;
  if (id == "1a" || id == "1b" || id == "1c") {
    const double a = id == "1a" ? -0.5 : 0.5;
    JinXinModel& m = p.jinxin;
    m.flux = [a](double u) { return a * u; };
    m.flux_derivative = [a](double) { return a; };
    m.epsilon = eps;
    if (id == "1a") {
      m.init_u = [](double x) { return 2.0 * std::sin(x); };
      m.init_v = [](double x) { return -std::sin(x); };
      m.bc_data = [](double t) { return std::sin(t / 2) + std::sin(t); };
    } else if (id == "1b") {
      m.init_u = [](double x) { return 2.0 * std::sin(x); };
      m.init_v = [](double x) { return std::sin(x); };
      m.bc_data = [](double t) { return -3.0 * std::sin(t / 2); };
    } else {
      m.init_u = [](double x) { return std::sin(x); };
      m.init_v = [](double x) { return -std::sin(x); };
      m.bc_data = [](double) { return 0.0; };
      m.forcing = [](double x, double t) { return -1.5 * std::sin(x + t); };
    }
    const AsymptoticSolution cf = example_closed_form(id, eps);
    const double xr = cfg.right;
    m.right_state = [cf, xr](double t) { return cf.evaluate(xr, t); };
    p.component_names = {"u", "v"};
  } else if (id == "2" || id == "4") {
    JinXinModel& m = p.jinxin;
    m.flux = example2_flux;
    m.flux_derivative = example2_dflux;
    m.epsilon = eps;
    if (id == "2") {
      m.init_u = [](double x) { return std::pow(std::sin(kPi * x), 3); };
      m.bc_data = [](double t) { return std::sin(2.0 * t); };
    } else {
      m.init_u = [](double x) { return std::sin(kPi * x); };
      m.bc_data = [](double) { return 0.0; };
      p.eps_profile = PiecewiseEpsilon::jump(0.0, 1.0, eps);
    }
    auto u0 = m.init_u;
    m.init_v = [u0](double x) { return example2_flux(u0(x)); };
    p.component_names = {"u", "v"};
  } else if (id == "3") {
    LinearRelaxationSystem& s = p.linear;
    s.n = 3;
    s.r = 1;
    s.a = Matrix{{0, 1, 0}, {1, 0, 1}, {0, 1, 1}};
    s.q = relaxation_matrix(3, Matrix{{-1}});
    s.b = Matrix{{1, 0, 0}, {0, 1, 2}};
    s.epsilon = eps;
    s.bc_data = [](double t) { return Vector{-std::sin(t), 0.0}; };
    s.init = [](double x) { return Vector{2.0 * std::sin(x), 0.0, 0.0}; };
    const AsymptoticSolution cf = example_closed_form("3", eps);
    const double xr = cfg.right;
    s.right_state = [cf, xr](double t) { return cf.evaluate(xr, t); };
    p.component_names = {"u", "v", "p"};
  } else if (id == "5") {
    LinearRelaxationSystem& s = p.linear;
    s.n = 3;
    s.r = 2;
    s.a = Matrix{{-1, 1, 0}, {1, 0, 1}, {0, 1, 0}};
    s.q = relaxation_matrix(3, Matrix{{-1, 0}, {0, -1}});
    s.b = Matrix(1, 3);
    s.epsilon = eps;
    s.bc_data = [](double) { return Vector{0.0}; };
    s.init = [](double x) { return Vector{std::sin(kPi * x), 0.0, 0.0}; };
    p.eps_profile = PiecewiseEpsilon::jump(0.0, 1.0, eps);
    p.component_names = {"u", "v", "p"};
  } else {
    throw InvalidArgument("unknown example id '" + id + "'");
  }
  return p;
}

std::string fn_name(const CustomProblem& c, const std::string& key) {
  auto it = c.functions.find(key);
  if (it == c.functions.end()) throw InvalidArgument("config field 'problem." + key + "' is required");
  return it->second;
}

Problem build_custom(const ExperimentConfig& cfg, const FunctionRegistry& fns) {
  const CustomProblem& c = *cfg.custom;
  Problem p;
  p.kind = c.kind;
  if (p.is_interface())
    p.eps_profile = c.epsilon_profile ? *c.epsilon_profile : PiecewiseEpsilon::constant(cfg.epsilon);
  if (c.kind == ProblemKind::jinxin || c.kind == ProblemKind::jinxin_interface) {
    JinXinModel& m = p.jinxin;
    m.flux = fns.get(fn_name(c, "flux"));
    m.flux_derivative = fns.get(fn_name(c, "flux_derivative"));
    m.init_u = fns.get(fn_name(c, "init_u"));
    const std::string v0 = fn_name(c, "init_v");
    if (v0 == "equilibrium") {
      auto f = m.flux;
      auto u0 = m.init_u;
      m.init_v = [f, u0](double x) { return f(u0(x)); };
    } else {
      m.init_v = fns.get(v0);
    }
    m.bc_data = c.kind == ProblemKind::jinxin ? fns.get(fn_name(c, "bc_data")) : ScalarFn([](double) { return 0.0; });
    m.bc_u = c.bc_u;
    m.bc_v = c.bc_v;
    m.epsilon = cfg.epsilon;
    m.validate();
    p.component_names = {"u", "v"};
    return p;
  }
  LinearRelaxationSystem& s = p.linear;
  s.n = c.a.rows();
  if (c.a.cols() != s.n || s.n < 2) throw InvalidArgument("config field 'problem.a': must be square, n >= 2");
  s.r = c.s.rows();
  if (s.r == 0 || s.r >= s.n || c.s.cols() != s.r)
    throw InvalidArgument("config field 'problem.s': must be square of size 1 .. n-1");
  s.a = c.a;
  s.q = relaxation_matrix(s.n, c.s);
  s.epsilon = cfg.epsilon;
  if (c.init.size() != s.n) throw InvalidArgument("config field 'problem.init': needs one function per component");
  std::vector<ScalarFn> init;
  for (const auto& name : c.init) init.push_back(fns.get(name));
  s.init = [init](double x) {
    Vector v;
    for (const auto& f : init) v.push_back(f(x));
    return v;
  };
  if (c.kind == ProblemKind::linear) {
    s.b = c.b;
    if (c.bc_data.size() != s.b.rows())
      throw InvalidArgument("config field 'problem.bc_data': needs one function per row of b");
    std::vector<ScalarFn> bc;
    for (const auto& name : c.bc_data) bc.push_back(fns.get(name));
    s.bc_data = [bc](double t) {
      Vector v;
      for (const auto& f : bc) v.push_back(f(t));
      return v;
    };
  } else {
    s.b = Matrix(1, s.n);
    s.bc_data = [](double) { return Vector{0.0}; };
  }
  for (std::size_t k = 0; k < s.n; ++k) p.component_names.push_back("U" + std::to_string(k + 1));
  return p;
}

}  // namespace

Problem build_problem(const ExperimentConfig& cfg, const FunctionRegistry& fns) {
  return cfg.custom ? build_custom(cfg, fns) : build_example(cfg);
}

// ---- runs and references ----------------------------------------------------

namespace {

Trajectory run_on_grid(const ExperimentConfig& cfg, const Problem& problem, const Grid1D& grid, Scheme scheme,
                       const RunOptions& opts) {
  const SchemeConfig sc = cfg.scheme_config();
  switch (problem.kind) {
    case ProblemKind::jinxin: return run_ibvp(problem.jinxin, scheme, grid, opts, sc);
    case ProblemKind::linear: return run_ibvp(problem.linear, scheme, grid, opts, sc);
    case ProblemKind::jinxin_interface:
      return run_interface(problem.jinxin, scheme, InterfaceGrid::build(grid, problem.eps_profile), opts, sc);
    case ProblemKind::linear_interface:
      return run_interface(problem.linear, scheme, InterfaceGrid::build(grid, problem.eps_profile), opts, sc);
  }
  throw InvalidArgument("unknown problem kind");
}

double min_epsilon(const Problem& p, const ExperimentConfig& cfg) {
  return p.is_interface() ? p.eps_profile.min_value() : cfg.epsilon;
}

// Upwind solution on the fine grid at time t (time step from the CFL number).
GridFunction fine_solution(const ExperimentConfig& cfg, const Problem& problem, const Grid1D& fine, double t) {
  RunOptions opts;
  opts.t_final = t;
  return run_on_grid(cfg, problem, fine, Scheme::upwind, opts).final_state().values;
}

bool has_closed_form(const std::string& id) { return id == "1a" || id == "1b" || id == "1c" || id == "3"; }

GridFunction jinxin_asymptotic(const ExperimentConfig& cfg, const Problem& problem, const Grid1D& grid, double t) {
  const JinXinModel& m = problem.jinxin;
  const Grid1D fine = nested_fine_grid(grid, grid.h / 16.0);
  const double xr = grid.right();
  ScalarFn inflow = m.right_state ? ScalarFn([&m](double s) { return m.right_state(s)[0]; })
                                  : ScalarFn([&m, xr](double) { return m.init_u(xr); });
  const Trajectory eq = equilibrium_scalar_solve(m.flux, m.flux_derivative, m.init_u, fine, t, inflow);
  const GridFunction ubar_grid = restrict_to(eq.final_state().values, fine, grid);
  const std::vector<double> ubar = ubar_grid.component(0);
  double mu0 = 0.0;
  if (m.flux_derivative(ubar[0]) < 0.0) mu0 = jinxin_layer_amplitude(m, ubar[0], t);
  (void)cfg;
  return asymptotic_limit_on_grid(ubar, mu0, m.flux);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const Problem& problem, std::size_t nx, Scheme scheme) {
  RunResult r;
  r.grid = Grid1D::uniform(cfg.left, cfg.right, nx);
  r.component_names = problem.component_names;
  RunOptions opts;
  opts.t_final = cfg.t_final;
  opts.dt = cfg.dt;
  opts.output_times = cfg.output_times;
  const auto t0 = std::chrono::steady_clock::now();
  r.trajectory = run_on_grid(cfg, problem, r.grid, scheme, opts);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

GridFunction reference_solution(const ExperimentConfig& cfg, const Problem& problem, const Grid1D& grid, double t) {
  switch (cfg.reference) {
    case ReferenceKind::closed_form:
      if (!has_closed_form(cfg.example_id))
        throw InvalidArgument("reference 'closed_form' is available for examples 1a, 1b, 1c and 3 only");
      return example_closed_form(cfg.example_id, cfg.epsilon).on_grid(grid, t, false);
    case ReferenceKind::asymptotic_limit:
      if (has_closed_form(cfg.example_id)) return example_closed_form(cfg.example_id, cfg.epsilon).on_grid(grid, t, true);
      if (problem.kind == ProblemKind::jinxin) return jinxin_asymptotic(cfg, problem, grid, t);
      throw InvalidArgument("reference 'asymptotic_limit' needs a closed form or a Jin-Xin boundary problem");
    case ReferenceKind::fine_mesh:
      return fine_mesh_reference([&](const Grid1D& fine) { return fine_solution(cfg, problem, fine, t); }, grid,
                                 cfg.h_fine, min_epsilon(problem, cfg));
  }
  throw InvalidArgument("unknown reference kind");
}

// ---- convergence ------------------------------------------------------------

bool ErrorReport::complete() const {
  return std::all_of(rows.begin(), rows.end(), [](const ResolutionResult& r) { return r.ok(); });
}

namespace {

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RELAXBL_THREADS")) {
    const std::string s(env);
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) n = v;
  }
  return n;
}

}  // namespace

ErrorReport convergence_study(const ExperimentConfig& cfg, const FunctionRegistry& fns) {
  cfg.validate();
  if (cfg.nx.size() < 3) throw InvalidArgument("convergence_study: at least three resolutions are required");
  const Problem problem = build_problem(cfg, fns);

  // A fine-mesh reference is computed once and restricted to every grid.
  std::optional<Grid1D> fine_grid;
  GridFunction fine_values;
  if (cfg.reference == ReferenceKind::fine_mesh) {
    const std::size_t coarsest = *std::min_element(cfg.nx.begin(), cfg.nx.end());
    fine_grid = nested_fine_grid(Grid1D::uniform(cfg.left, cfg.right, coarsest), cfg.h_fine);
    if (!(fine_grid->h < min_epsilon(problem, cfg)))
      throw InvalidArgument("fine-mesh reference does not resolve eps: h_fine >= eps");
    fine_values = fine_solution(cfg, problem, *fine_grid, cfg.t_final);
  }

  ErrorReport report;
  report.rows.resize(cfg.nx.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cfg.nx.size(); k = next++) {
      ResolutionResult& row = report.rows[k];
      row.nx = cfg.nx[k];
      try {
        const RunResult run = run_experiment(cfg, problem, row.nx, cfg.scheme);
        row.h = run.grid.h;
        row.runtime_seconds = run.runtime_seconds;
        const SolutionState& fin = run.trajectory.final_state();
        const GridFunction ref = fine_grid ? restrict_to(fine_values, *fine_grid, run.grid)
                                           : reference_solution(cfg, problem, run.grid, fin.time);
        row.norms = error_norms(fin.values, ref, run.grid.h);
      } catch (const std::exception& e) {
        row.failure = e.what();
        if (row.h == 0.0) row.h = (cfg.right - cfg.left) / static_cast<double>(row.nx);
      }
    }
  };
  const std::size_t nthreads = std::min(thread_cap(), cfg.nx.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
  }

  std::vector<double> h, e1, e2, ei;
  double worst = 0.0;
  for (const auto& r : report.rows) {
    if (!r.ok()) continue;
    h.push_back(r.h);
    e1.push_back(r.norms.l1);
    e2.push_back(r.norms.l2);
    ei.push_back(r.norms.linf);
    worst = std::max(worst, r.norms.linf);
  }
  report.exact = !h.empty() && worst <= 1e-13;
  if (report.exact) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.slopes = {nan, nan, nan};
  } else {
    report.slopes = {fit_slope(h, e1), fit_slope(h, e2), fit_slope(h, ei)};
  }
  return report;
}

// ---- comparison -------------------------------------------------------------

SchemeSummary summarize_errors(const GridFunction& numeric, const GridFunction& reference,
                               const std::vector<std::size_t>& interface_points) {
  if (numeric.num_points() != reference.num_points() || numeric.components() != reference.components())
    throw InvalidArgument("summarize_errors: shape mismatch");
  auto near_interface = [&](std::size_t j) {
    for (std::size_t i : interface_points)
      if (j + kInterfaceHalfWidth >= i && j <= i + kInterfaceHalfWidth) return true;
    return false;
  };
  SchemeSummary s;
  for (std::size_t j = 0; j < numeric.num_points(); ++j) {
    double e = 0.0;
    for (std::size_t c = 0; c < numeric.components(); ++c) e = std::max(e, std::abs(numeric(j, c) - reference(j, c)));
    if (j == 0) s.boundary_error = e;
    if (near_interface(j)) {
      s.interface_sup = std::max(s.interface_sup, e);
    } else if (j > 0) {
      s.interior_sup = std::max(s.interior_sup, e);
    }
    if (!interface_points.empty() && j == interface_points.front()) s.interface_point = e;
  }
  return s;
}

CompareReport compare_schemes(const ExperimentConfig& cfg, const FunctionRegistry& fns) {
  cfg.validate();
  const Problem problem = build_problem(cfg, fns);
  const std::size_t nx = cfg.nx.front();
  CompareReport rep;
  const RunResult up = run_experiment(cfg, problem, nx, Scheme::upwind);
  const RunResult bap = run_experiment(cfg, problem, nx, Scheme::bap);
  rep.grid = up.grid;
  rep.time = up.trajectory.final_state().time;
  rep.component_names = problem.component_names;
  rep.upwind = up.trajectory.final_state().values;
  rep.bap = bap.trajectory.final_state().values;
  rep.reference = reference_solution(cfg, problem, rep.grid, rep.time);
  if (problem.is_interface()) rep.interface_points = InterfaceGrid::build(rep.grid, problem.eps_profile).interface_points();
  rep.upwind_summary = summarize_errors(rep.upwind, rep.reference, rep.interface_points);
  rep.bap_summary = summarize_errors(rep.bap, rep.reference, rep.interface_points);
  return rep;
}

// ---- CSV --------------------------------------------------------------------

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw InvalidArgument("write_csv: row length differs from header");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_number(row[k]);
    out << "\n";
  }
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("'" + path + "' is empty");
  t.header = split_commas(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_commas(line);
    if (cells.size() != t.header.size())
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw InvalidArgument(path + ":" + std::to_string(lineno) + ": '" + c + "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable solution_table(const Grid1D& grid, const GridFunction& values, const std::vector<std::string>& names) {
  if (values.num_points() != grid.num_points || values.components() != names.size())
    throw InvalidArgument("solution_table: shape mismatch");
  CsvTable t;
  t.header.push_back("x");
  t.header.insert(t.header.end(), names.begin(), names.end());
  for (std::size_t j = 0; j < grid.num_points; ++j) {
    std::vector<double> row{grid.x(j)};
    for (std::size_t c = 0; c < values.components(); ++c) row.push_back(values(j, c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable errors_table(const ErrorReport& report) {
  CsvTable t;
  t.header = {"N_x", "h", "L1", "L2", "Linf"};
  for (const auto& r : report.rows) {
    if (!r.ok()) continue;
    t.rows.push_back({static_cast<double>(r.nx), r.h, r.norms.l1, r.norms.l2, r.norms.linf});
  }
  return t;
}

CsvTable compare_table(const CompareReport& rep) {
  CsvTable t;
  t.header.push_back("x");
  for (const char* tag : {"ref_", "upwind_", "bap_", "err_upwind_", "err_bap_"})
    for (const auto& n : rep.component_names) t.header.push_back(tag + n);
  const std::size_t nc = rep.component_names.size();
  for (std::size_t j = 0; j < rep.grid.num_points; ++j) {
    std::vector<double> row{rep.grid.x(j)};
    for (std::size_t c = 0; c < nc; ++c) row.push_back(rep.reference(j, c));
    for (std::size_t c = 0; c < nc; ++c) row.push_back(rep.upwind(j, c));
    for (std::size_t c = 0; c < nc; ++c) row.push_back(rep.bap(j, c));
    for (std::size_t c = 0; c < nc; ++c) row.push_back(std::abs(rep.upwind(j, c) - rep.reference(j, c)));
    for (std::size_t c = 0; c < nc; ++c) row.push_back(std::abs(rep.bap(j, c) - rep.reference(j, c)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---- summaries and plot scripts ---------------------------------------------

namespace {

std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "problem: " << (cfg.example_id.empty() ? "custom" : "example " + cfg.example_id) << "\n"
     << "domain: [" << cfg.left << ", " << cfg.right << "]\n"
     << "t_final: " << cfg.t_final << "\n"
     << "epsilon: " << cfg.epsilon << "\n"
     << "p: " << cfg.p_exponent << "\n"
     << "cfl: " << cfg.cfl << "\n";
  if (cfg.dt) os << "dt: " << *cfg.dt << "\n";
  os << "reference: " << to_string(cfg.reference);
  if (cfg.reference == ReferenceKind::fine_mesh) os << " (h_fine = " << cfg.h_fine << ")";
  os << "\n";
  return os.str();
}

std::string slope_text(double s) {
  if (std::isnan(s)) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", s);
  return buf;
}

}  // namespace

std::string convergence_summary(const ExperimentConfig& cfg, const ErrorReport& report) {
  std::ostringstream os;
  os << describe(cfg) << "scheme: " << to_string(cfg.scheme) << "\n\n";
  os << "N_x  h  L1  L2  Linf  runtime_s\n";
  for (const auto& r : report.rows) {
    os << r.nx << "  " << format_number(r.h) << "  ";
    if (r.ok()) {
      os << format_number(r.norms.l1) << "  " << format_number(r.norms.l2) << "  " << format_number(r.norms.linf)
         << "  " << r.runtime_seconds << "\n";
    } else {
      os << "FAILED: " << r.failure << "\n";
    }
  }
  os << "\n";
  if (report.exact) {
    os << "slopes: exact (all errors vanish)\n";
  } else {
    os << "slope L1: " << slope_text(report.slopes.l1) << "\n"
       << "slope L2: " << slope_text(report.slopes.l2) << "\n"
       << "slope Linf: " << slope_text(report.slopes.linf) << "\n";
  }
  if (!report.complete()) os << "note: some resolutions failed; slopes use the remaining runs\n";
  return os.str();
}

std::string compare_summary(const ExperimentConfig& cfg, const CompareReport& rep) {
  std::ostringstream os;
  os << describe(cfg) << "N_x: " << rep.grid.cells() << "\n\n";
  auto line = [&](const char* name, const SchemeSummary& s) {
    os << name << ": boundary_error " << format_number(s.boundary_error) << ", interior_sup "
       << format_number(s.interior_sup);
    if (!rep.interface_points.empty())
      os << ", interface_sup " << format_number(s.interface_sup) << ", interface_point "
         << format_number(s.interface_point);
    os << "\n";
  };
  line("upwind", rep.upwind_summary);
  line("bap", rep.bap_summary);
  if (!rep.interface_points.empty()) {
    os << "interface points:";
    for (std::size_t j : rep.interface_points) os << " " << j << " (x=" << rep.grid.x(j) << ")";
    os << "\n";
  }
  return os.str();
}

std::string convergence_plot_script() {
  return "set datafile separator ','\n"
         "set logscale xy\n"
         "set key top left\n"
         "set xlabel 'h'\n"
         "set ylabel 'error'\n"
         "set terminal pngcairo size 900,600\n"
         "set output 'errors.png'\n"
         "plot 'errors.csv' skip 1 using 2:3 with linespoints title 'L1', \\\n"
         "     '' skip 1 using 2:4 with linespoints title 'L2', \\\n"
         "     '' skip 1 using 2:5 with linespoints title 'Linf'\n";
}

std::string compare_plot_script(const std::vector<std::string>& names, std::size_t stride) {
  // The stride only thins the markers; the CSV keeps every grid point.
  std::ostringstream os;
  const std::size_t n = names.size();
  os << "set datafile separator ','\n"
     << "set terminal pngcairo size 900,600\n"
     << "set xlabel 'x'\n";
  for (std::size_t c = 0; c < n; ++c) {
    os << "set output 'compare_" << names[c] << ".png'\n"
       << "set title '" << names[c] << "'\n"
       << "plot 'compare.csv' skip 1 using 1:" << 2 + c << " with lines title 'reference', \\\n"
       << "     '' skip 1 every " << stride << " using 1:" << 2 + n + c << " with points pt 6 title 'upwind', \\\n"
       << "     '' skip 1 every " << stride << " using 1:" << 2 + 2 * n + c << " with points pt 2 title 'bap'\n";
  }
  return os.str();
}

}  // namespace relaxbl::harness
