#include <cmath>

#include "doctest.h"
#include "relaxbl/reference.hpp"

using namespace relaxbl;

namespace {

LinearRelaxationSystem example3() {
  LinearRelaxationSystem s;
  s.n = 3;
  s.r = 1;
  s.a = Matrix{{0, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  s.q = relaxation_matrix(3, Matrix{{-1}});
  s.b = Matrix{{1, 0, 0}, {0, 1, 2}};
  s.epsilon = 1e-6;
  s.bc_data = [](double t) { return Vector{-std::sin(t), 0.0}; };
  s.init = [](double x) { return Vector{2 * std::sin(x), 0.0, 0.0}; };
  return s;
}

JinXinModel example1a() {
  JinXinModel m;
  m.flux = [](double u) { return -0.5 * u; };
  m.flux_derivative = [](double) { return -0.5; };
  m.epsilon = 1e-9;
  m.init_u = [](double x) { return 2 * std::sin(x); };
  m.init_v = [](double x) { return -std::sin(x); };
  m.bc_data = [](double t) { return std::sin(t / 2) + std::sin(t); };
  return m;
}

JinXinModel example2() {
  JinXinModel m;
  m.flux = [](double u) { return 0.25 * (std::exp(-u) - 1); };
  m.flux_derivative = [](double u) { return -0.25 * std::exp(-u); };
  m.epsilon = 1e-6;
  m.init_u = [](double x) { return std::pow(std::sin(M_PI * x), 3); };
  m.init_v = [](double) { return 0.0; };
  m.bc_data = [](double t) { return std::sin(2 * t); };
  return m;
}

// Central differences of a vector field.
Vector d_dt(const std::function<Vector(double, double)>& f, double x, double t, double d = 1e-4) {
  Vector a = f(x, t + d), b = f(x, t - d);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = (a[k] - b[k]) / (2 * d);
  return a;
}
Vector d_dx(const std::function<Vector(double, double)>& f, double x, double t, double d = 1e-4) {
  Vector a = f(x + d, t), b = f(x - d, t);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = (a[k] - b[k]) / (2 * d);
  return a;
}

}  // namespace

TEST_CASE("closed form 1a at the boundary") {
  const AsymptoticSolution s = example_closed_form("1a");
  for (double t : {0.1, 0.5, 1.3}) {
    const Vector u = s.evaluate(0.0, t);
    CHECK(u[0] == doctest::Approx(2 * std::sin(t / 2) + std::sin(t)));
    CHECK(u[1] == doctest::Approx(-std::sin(t / 2)));
    // Boundary condition u + v = sin(t/2) + sin(t) holds with the layer.
    CHECK(u[0] + u[1] == doctest::Approx(std::sin(t / 2) + std::sin(t)));
  }
}

TEST_CASE("closed form 1c solves the forced system exactly") {
  const AsymptoticSolution s = example_closed_form("1c");
  CHECK(s.exact);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int k = 0; k < 50; ++k) {
      const double x = 2.0 * i / 49, t = 0.01 + 0.5 * k / 49;
      const Vector u = s.evaluate(x, t), ut = d_dt(s.outer, x, t), ux = d_dx(s.outer, x, t);
      worst = std::max(worst, std::abs(ut[0] + ux[1]));
      worst = std::max(worst, std::abs(ut[1] + ux[0] - (0.5 * u[0] - u[1]) + 1.5 * std::sin(x + t)));
    }
  CHECK(worst <= 1e-7);  // central-difference truncation ~ d^2
  const Vector b = s.evaluate(0.0, 0.4);
  CHECK(std::abs(b[0] + b[1]) < 1e-15);
}

TEST_CASE("outer parts satisfy the equilibrium equations") {
  // 1a / 1b: ubar_t + a ubar_x = 0 with v = a ubar; 3: ubar_t + A11 ubar_x = 0, p = 0.
  for (const auto& [id, a] : {std::pair<std::string, double>{"1a", -0.5}, {"1b", 0.5}}) {
    const AsymptoticSolution s = example_closed_form(id);
    for (double x : {0.1, 0.9, 1.7})
      for (double t : {0.05, 0.3}) {
        const Vector u = s.outer(x, t), ut = d_dt(s.outer, x, t), ux = d_dx(s.outer, x, t);
        CHECK(std::abs(ut[0] + a * ux[0]) < 1e-7);
        CHECK(u[1] == doctest::Approx(a * u[0]));
      }
  }
  const AsymptoticSolution s3 = example_closed_form("3");
  for (double x : {0.1, 0.4})
    for (double t : {0.05, 0.3}) {
      const Vector ut = d_dt(s3.outer, x, t), ux = d_dx(s3.outer, x, t);
      CHECK(std::abs(ut[0] + ux[1]) < 1e-7);
      CHECK(std::abs(ut[1] + ux[0]) < 1e-7);
      CHECK(s3.outer(x, t)[2] == 0.0);
    }
}

TEST_CASE("closed form 3 at the boundary satisfies both boundary conditions") {
  const AsymptoticSolution s = example_closed_form("3");
  for (double t : {0.1, 0.3, 1.0}) {
    const Vector u = s.evaluate(0.0, t);
    CHECK(u[0] == doctest::Approx(-std::sin(t)));
    CHECK(u[1] == doctest::Approx(-2 * std::sin(t)));
    CHECK(u[2] == doctest::Approx(std::sin(t)));
    CHECK(std::abs(u[1] + 2 * u[2]) < 1e-15);
  }
}

TEST_CASE("example_closed_form rejects unknown ids") {
  CHECK_THROWS_AS(example_closed_form("9"), InvalidArgument);
  CHECK_THROWS_AS(example_closed_form("1a", 0.0), InvalidArgument);
}

TEST_CASE("equilibrium solver keeps constants and transports linear data") {
  const Grid1D g = Grid1D::uniform(0, 2, 100);
  const ScalarFn f = [](double u) { return -0.5 * u; };
  const ScalarFn df = [](double) { return -0.5; };
  const Trajectory c = equilibrium_scalar_solve(
      f, df, [](double) { return 0.7; }, g, 0.5, [](double) { return 0.7; });
  for (double v : c.final_state().values.raw()) CHECK(v == 0.7);

  auto transport_error = [&](std::size_t n) {
    const Grid1D gg = Grid1D::uniform(0, 2, n);
    const Trajectory tr = equilibrium_scalar_solve(
        f, df, [](double x) { return std::sin(x); }, gg, 0.5, [](double t) { return std::sin(2 + 0.5 * t); });
    double e = 0.0;
    for (std::size_t j = 0; j < gg.num_points; ++j)
      e = std::max(e, std::abs(tr.final_state().values(j, 0) - std::sin(gg.x(j) + 0.25)));
    return e;
  };
  const double e1 = transport_error(100), e2 = transport_error(200);
  CHECK(e1 < 0.02);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("equilibrium solver detects a sign change of f'") {
  const Grid1D g = Grid1D::uniform(-1, 1, 50);
  CHECK_THROWS_AS(equilibrium_scalar_solve([](double u) { return 0.5 * u * u; }, [](double u) { return u; },
                                           [](double x) { return x; }, g, 0.1, [](double) { return 0.0; }),
                  DegenerateSign);
}

TEST_CASE("layer amplitude") {
  JinXinModel m = example1a();
  for (double t : {0.2, 0.5}) CHECK(jinxin_layer_amplitude(m, 2 * std::sin(t / 2), t) == doctest::Approx(std::sin(t)));
  m.bc_data = [](double) { return 0.3 - 0.5 * 0.3; };
  CHECK(std::abs(jinxin_layer_amplitude(m, 0.3, 1.0)) < 1e-15);
  m.bc_u = 0.0;
  CHECK_THROWS_AS(jinxin_layer_amplitude(m, 0.3, 1.0), InvalidArgument);
}

TEST_CASE("layer profile") {
  const JinXinModel m = example1a();
  const auto zero = jinxin_layer_profile(m, 0.4, 0.0, 10.0, 100);
  for (double v : zero) CHECK(v == 0.0);
  // mu_y = a mu with a = -0.5: mu = mu0 exp(a y); step 1e-2.
  const auto p = jinxin_layer_profile(m, 0.4, 0.8, 10.0, 1000);
  REQUIRE(p.size() == 1001);
  for (std::size_t k = 0; k < p.size(); k += 50) {
    const double exact = 0.8 * std::exp(-0.5 * 1e-2 * static_cast<double>(k));
    CHECK(std::abs(p[k] - exact) <= 1e-8 * exact);
  }
  const JinXinModel m2 = example2();
  const auto q = jinxin_layer_profile(m2, 0.0, 0.5, 200.0, 20000);
  CHECK(std::abs(q.back()) < 1e-12);
  CHECK(default_layer_horizon(m2, 0.0) == doctest::Approx(200.0));

  JinXinModel grow = example1a();
  grow.flux = [](double u) { return 0.5 * u; };
  grow.flux_derivative = [](double) { return 0.5; };
  CHECK_THROWS_AS(jinxin_layer_profile(grow, 0.0, 0.5, 50.0, 500), InvalidArgument);
  // f'(0) < 0 but mu_y = -mu + mu^2 > 0 for mu0 = 2: the datum lies outside the basin.
  grow.flux = [](double u) { return -u + u * u; };
  grow.flux_derivative = [](double u) { return -1.0 + 2.0 * u; };
  CHECK_NOTHROW(jinxin_layer_profile(grow, 0.0, 0.5, 50.0, 500));
  CHECK_THROWS_AS(jinxin_layer_profile(grow, 0.0, 2.0, 50.0, 500), NumericalFailure);
}

TEST_CASE("reduced boundary system for the 3x3 example") {
  const LinearRelaxationSystem sys = example3();
  const DerivedStructure d = derive_structure(sys);
  const ReducedBCSystem rb = reduced_bc_build(sys, d);
  REQUIRE(rb.matrix.rows() == 2);
  REQUIRE(rb.matrix.cols() == 2);
  // Up to the scaling of R+^1: [[s, -1], [s, 2]].
  CHECK(rb.matrix(0, 0) == doctest::Approx(rb.matrix(1, 0)));
  CHECK(std::abs(rb.matrix(0, 0)) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(rb.matrix(0, 1) == doctest::Approx(-1.0));
  CHECK(rb.matrix(1, 1) == doctest::Approx(2.0));
  CHECK(std::abs(determinant(rb.matrix)) > 1.0);

  // alpha- from the outer solution at x = 0: ubar = (0, -2 sin t).
  const Matrix lm = d.split_a11.l_minus;
  for (double t : {0.1, 0.7}) {
    const Vector ubar{0.0, -2 * std::sin(t)};
    const Vector am = lm * ubar;
    const ReducedBCSolution sol = rb.solve(t, am);
    CHECK(sol.nu[0] == doctest::Approx(std::sin(t)).epsilon(1e-12));
    CHECK(std::abs(sol.ubar0[0]) < 1e-12);
    CHECK(sol.ubar0[1] == doctest::Approx(-2 * std::sin(t)).epsilon(1e-12));
    CHECK(sol.mu0[0] == doctest::Approx(-std::sin(t)).epsilon(1e-12));

    // Rescaling the R+^1 column keeps the system solvable with the same nu.
    ReducedBCSystem scaled = rb;
    for (std::size_t i = 0; i < 2; ++i) scaled.matrix(i, 0) *= 3.0;
    const Vector x = solve_dense(scaled.matrix, scaled.rhs(t, am));
    CHECK(x[1] == doctest::Approx(std::sin(t)).epsilon(1e-12));
  }
}

TEST_CASE("asymptotic limits on grids") {
  const ScalarFn f = [](double u) { return 0.25 * (std::exp(-u) - 1); };
  const std::vector<double> ubar{0.1, 0.2, 0.3, 0.4};
  const GridFunction g0 = asymptotic_limit_on_grid(ubar, 0.0, f);
  const GridFunction g1 = asymptotic_limit_on_grid(ubar, 0.5, f);
  for (std::size_t j = 0; j < ubar.size(); ++j) {
    CHECK(g0(j, 0) == ubar[j]);
    CHECK(g0(j, 1) == f(ubar[j]));
    if (j >= 1) CHECK(g1(j, 1) == f(g1(j, 0)));
  }
  CHECK(g1(0, 0) == doctest::Approx(0.6));
  CHECK(g1(0, 1) == f(0.1));

  // 1a at j = 0.
  const double t = 0.5;
  const GridFunction a = example_closed_form("1a").on_grid(Grid1D::uniform(0, 2, 10), t, true);
  CHECK(a(0, 0) == doctest::Approx(2 * std::sin(t / 2) + std::sin(t)));
  CHECK(a(0, 1) == doctest::Approx(-std::sin(t / 2)));
  CHECK(a(1, 0) == doctest::Approx(2 * std::sin(0.2 + t / 2)));

  // 3 at j = 0 from the linear formula with nu0 = sin t.
  GridFunction ub(3, 2);
  ub(0, 1) = -2 * std::sin(t);
  const GridFunction l3 = asymptotic_limit_on_grid(ub, Vector{std::sin(t)}, Matrix{{1}, {0}});
  CHECK(l3(0, 0) == doctest::Approx(-std::sin(t)));
  CHECK(l3(0, 1) == doctest::Approx(-2 * std::sin(t)));
  CHECK(l3(0, 2) == doctest::Approx(std::sin(t)));
  CHECK(l3(1, 2) == 0.0);
}

TEST_CASE("restriction and nested grids") {
  const Grid1D coarse = Grid1D::uniform(0, 1, 10);
  const Grid1D fine = nested_fine_grid(coarse, 0.025);
  CHECK(fine.num_points == 41);
  GridFunction gf(fine.num_points, 1);
  for (std::size_t j = 0; j < fine.num_points; ++j) gf(j, 0) = fine.x(j);
  const GridFunction r = restrict_to(gf, fine, coarse);
  for (std::size_t j = 0; j < coarse.num_points; ++j) CHECK(r(j, 0) == doctest::Approx(coarse.x(j)));
  CHECK(restrict_to(gf, fine, fine) == gf);
  CHECK_THROWS_AS(restrict_to(gf, fine, Grid1D::uniform(0, 1, 7)), InvalidArgument);
  CHECK_THROWS_AS(nested_fine_grid(coarse, 0.03), InvalidArgument);
}

TEST_CASE("fine-mesh reference requires a resolved layer") {
  const Grid1D coarse = Grid1D::uniform(0, 1, 10);
  auto solve = [](const Grid1D& g) { return GridFunction(g.num_points, 1); };
  CHECK_THROWS_AS(fine_mesh_reference(solve, coarse, 1e-2, 1e-3), InvalidArgument);
  CHECK_NOTHROW(fine_mesh_reference(solve, coarse, 1e-2, 1.0));
}

TEST_CASE("fine-mesh reference approaches the closed form at first order") {
  JinXinModel m;
  m.flux = [](double u) { return 0.5 * u; };
  m.flux_derivative = [](double) { return 0.5; };
  m.epsilon = 1.0;
  m.init_u = [](double x) { return std::sin(x); };
  m.init_v = [](double x) { return -std::sin(x); };
  m.bc_data = [](double) { return 0.0; };
  m.forcing = [](double x, double t) { return -1.5 * std::sin(x + t); };
  m.right_state = [](double t) { return Vector{std::sin(2 + t), -std::sin(2 + t)}; };
  SchemeConfig cfg;
  cfg.right_boundary = RightBoundary::reference_dirichlet;
  const Grid1D coarse = Grid1D::uniform(0, 2, 20);
  auto err = [&](double hf) {
    const GridFunction ref = fine_mesh_reference(
        [&](const Grid1D& g) {
          RunOptions o;
          o.t_final = 0.5;
          return run_ibvp(m, Scheme::upwind, g, o, cfg).final_state().values;
        },
        coarse, hf, m.epsilon);
    const GridFunction exact = example_closed_form("1c").on_grid(coarse, 0.5);
    double e = 0.0;
    for (std::size_t j = 0; j < coarse.num_points; ++j)
      for (std::size_t c = 0; c < 2; ++c) e = std::max(e, std::abs(ref(j, c) - exact(j, c)));
    return e;
  };
  const double e1 = err(0.01), e2 = err(0.005);
  CHECK(e1 < 0.05);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.25));
}
