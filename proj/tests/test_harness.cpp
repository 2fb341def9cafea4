#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "relaxbl/harness.hpp"

using namespace relaxbl;
using namespace relaxbl::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relaxbl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "relaxbl");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

GridFunction filled(std::size_t n, std::size_t c, double v) {
  GridFunction g(n, c);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < c; ++k) g(j, k) = v;
  return g;
}

}  // namespace

TEST_CASE("error_norms") {
  const GridFunction a = filled(10, 2, 0.3);
  const ErrorNorms z = error_norms(a, a, 0.1);
  CHECK(z.l1 == 0.0);
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);

  // e = c on every point of one component.
  GridFunction b = filled(10, 1, 0.0), c = filled(10, 1, -0.25);
  const ErrorNorms k = error_norms(b, c, 0.1);
  CHECK(k.l1 == doctest::Approx(0.1 * 10 * 0.25));
  CHECK(k.linf == doctest::Approx(0.25));

  // A single error at j = 0 fades in L1 and L2 but not in Linf.
  GridFunction d = filled(10, 1, 0.0);
  d(0, 0) = 2.0;
  const ErrorNorms s = error_norms(d, b, 0.01);
  CHECK(s.l1 == doctest::Approx(0.02));
  CHECK(s.l2 == doctest::Approx(std::sqrt(0.01) * 2.0));
  CHECK(s.linf == doctest::Approx(2.0));

  CHECK_THROWS_AS(error_norms(filled(3, 1, 0), filled(4, 1, 0), 0.1), InvalidArgument);
}

TEST_CASE("fit_slope recovers a power law") {
  const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e;
  for (double x : h) e.push_back(3.0 * x * x);
  CHECK(fit_slope(h, e) == doctest::Approx(2.0));
  CHECK(std::isnan(fit_slope({0.1}, {1.0})));
  CHECK(std::isnan(fit_slope({0.1, 0.05}, {0.0, 0.0})));
}

TEST_CASE("example registry") {
  const auto& reg = example_registry();
  std::vector<std::string> ids;
  for (const auto& e : reg) ids.push_back(e.id);
  CHECK(ids == std::vector<std::string>{"1a", "1b", "1c", "2", "3", "4", "5"});
  CHECK(find_example("2").defaults.dt.value() == 5e-4);
  CHECK(find_example("3").defaults.nx == std::vector<std::size_t>{100});
  CHECK_THROWS_AS(find_example("6"), InvalidArgument);
  for (const auto& e : reg) CHECK_NOTHROW(e.defaults.validate());
}

TEST_CASE("convergence study: first order on the non-stiff forced example") {
  ExperimentConfig cfg = example_config("1c");
  cfg.nx = {50, 100, 200, 400};
  const ErrorReport rep = convergence_study(cfg);
  CHECK(rep.complete());
  CHECK_FALSE(rep.exact);
  for (double s : {rep.slopes.l1, rep.slopes.l2, rep.slopes.linf}) CHECK(s == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("convergence study: a constant steady state is reported as exact") {
  const std::string json = R"({
    "problem": {"model": "jinxin", "flux": "flux_neg_half_u", "flux_derivative": "dflux_neg_half_u",
                "init_u": "one", "init_v": "equilibrium", "bc_data": "half"},
    "domain": [0, 1], "nx": [10, 20, 40], "t_final": 0.2, "epsilon": 1.0, "h_fine": 0.0125
  })";
  const ExperimentConfig cfg = config_from_json(json);
  const ErrorReport rep = convergence_study(cfg);
  CHECK(rep.complete());
  CHECK(rep.exact);
  CHECK(std::isnan(rep.slopes.l1));
  CHECK(convergence_summary(cfg, rep).find("exact") != std::string::npos);
}

TEST_CASE("convergence study annotates failed resolutions") {
  ExperimentConfig cfg = example_config("1c");
  cfg.nx = {50, 100, 200};
  cfg.dt = 0.02;  // violates the CFL bound for N_x >= 100
  const ErrorReport rep = convergence_study(cfg);
  CHECK_FALSE(rep.complete());
  CHECK(rep.rows[0].ok());
  CHECK_FALSE(rep.rows[1].ok());
  CHECK(rep.rows[1].failure.find("CFL") != std::string::npos);
  CHECK(errors_table(rep).rows.size() == 1);
}

TEST_CASE("convergence study needs three resolutions") {
  ExperimentConfig cfg = example_config("1c");
  cfg.nx = {50, 100};
  CHECK_THROWS_AS(convergence_study(cfg), InvalidArgument);
}

TEST_CASE("a scheme compared with itself has zero error") {
  ExperimentConfig cfg = example_config("1a");
  const Problem p = build_problem(cfg);
  const RunResult r = run_experiment(cfg, p, 50, Scheme::bap);
  const SchemeSummary s = summarize_errors(r.trajectory.final_state().values, r.trajectory.final_state().values, {});
  CHECK(s.boundary_error == 0.0);
  CHECK(s.interior_sup == 0.0);
}

TEST_CASE("compare on the nonlinear boundary example") {
  const CompareReport rep = compare_schemes(example_config("2"));
  CHECK(rep.grid.cells() == 800);
  CHECK(rep.bap_summary.boundary_error < 0.1 * rep.upwind_summary.boundary_error);
  CHECK(rep.bap_summary.interior_sup < 0.01);
}

TEST_CASE("compare on the 3x3 boundary example") {
  const CompareReport rep = compare_schemes(example_config("3"));
  const double up_u = std::abs(rep.upwind(0, 0) - rep.reference(0, 0));
  const double bap_u = std::abs(rep.bap(0, 0) - rep.reference(0, 0));
  CHECK(up_u >= 10 * bap_u);
  CHECK(std::max(rep.bap_summary.boundary_error, rep.bap_summary.interior_sup) <= 0.05);
  const CsvTable t = compare_table(rep);
  CHECK(t.header.size() == 1 + 5 * 3);
  CHECK(t.header[1] == "ref_u");
  CHECK(t.rows.size() == 101);
}

TEST_CASE("sign mode on the nonlinear example converges like derivative mode") {
  ExperimentConfig cfg = example_config("2");
  cfg.dt.reset();
  auto l1 = [&](AMode mode, std::size_t nx) {
    cfg.a_mode = mode;
    const Problem p = build_problem(cfg);
    const RunResult r = run_experiment(cfg, p, nx, Scheme::bap);
    return error_norms(r.trajectory.final_state().values,
                       reference_solution(cfg, p, r.grid, r.trajectory.final_state().time), r.grid.h)
        .l1;
  };
  const double d1 = l1(AMode::derivative, 100), d2 = l1(AMode::derivative, 200);
  const double s1 = l1(AMode::sign, 100), s2 = l1(AMode::sign, 200);
  CHECK(d2 < d1);
  CHECK(s2 < s1);
  CHECK(s1 / s2 == doctest::Approx(2.0).epsilon(0.35));
  CHECK(s2 <= 3 * d2);
}

TEST_CASE("refined-mesh and closed-form errors agree to the reference accuracy") {
  ExperimentConfig cfg = example_config("1c");
  const Problem p = build_problem(cfg);
  const RunResult r = run_experiment(cfg, p, 40, Scheme::bap);
  const GridFunction& u = r.trajectory.final_state().values;
  const ErrorNorms direct = error_norms(u, reference_solution(cfg, p, r.grid, cfg.t_final), r.grid.h);
  cfg.reference = ReferenceKind::fine_mesh;
  cfg.h_fine = 0.0025;
  const ErrorNorms fine = error_norms(u, reference_solution(cfg, p, r.grid, cfg.t_final), r.grid.h);
  // The fine reference is itself first order in h_fine.
  CHECK(std::abs(direct.linf - fine.linf) <= 2 * cfg.h_fine);
  CHECK(std::abs(direct.l1 - fine.l1) <= 2 * 2 * cfg.h_fine);
}

TEST_CASE("JSON config parsing") {
  const ExperimentConfig cfg = config_from_json(R"({"example": "2", "nx": [100, 200, 400], "scheme": "upwind",
      "p": 3, "a_mode": "sign", "switch_rule": "hard_tau_eps", "dt": null, "output_times": [0.1]})");
  CHECK(cfg.example_id == "2");
  CHECK(cfg.nx == std::vector<std::size_t>{100, 200, 400});
  CHECK(cfg.scheme == Scheme::upwind);
  CHECK(cfg.p_exponent == 3);
  CHECK(cfg.a_mode == AMode::sign);
  CHECK(cfg.switch_rule == SwitchRule::hard_tau_eps);
  CHECK_FALSE(cfg.dt.has_value());
  CHECK(cfg.epsilon == 1e-6);

  auto message = [](const std::string& text) {
    try {
      config_from_json(text);
    } catch (const InvalidArgument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("{\n\"example\": \"1a\",\n\"cfl\": 0.5,,\n}").find("line 3") != std::string::npos);
  CHECK(message(R"({"example": "1a", "cfl": "big"})").find("'cfl'") != std::string::npos);
  CHECK(message(R"({"example": "1a", "cfl": 1.5})").find("'cfl'") != std::string::npos);
  CHECK(message(R"({"example": "1a", "nx": [4]})").find("'nx'") != std::string::npos);
  CHECK(message(R"({"example": "1a", "colour": 1})").find("'colour'") != std::string::npos);
  CHECK(message(R"({"example": "1a", "scheme": "central"})").find("'scheme'") != std::string::npos);
  CHECK(message(R"({"nx": [10]})").find("'example' or 'problem'") != std::string::npos);
  CHECK(message(R"({"problem": {"model": "jinxin", "flux": 3}, "nx": [10], "t_final": 1})")
            .find("'problem.flux'") != std::string::npos);
}

TEST_CASE("custom linear problem from JSON") {
  const ExperimentConfig cfg = config_from_json(R"({
    "problem": {"model": "linear", "a": [[0, 1, 0], [1, 0, 1], [0, 1, 1]], "s": [[-1]],
                "b": [[1, 0, 0], [0, 1, 2]], "init": ["two_sin", "zero", "zero"], "bc_data": ["neg_sin", "zero"]},
    "domain": [0, 0.5], "nx": [50], "t_final": 0.1, "epsilon": 1e-6, "dt": 1e-3})");
  const Problem p = build_problem(cfg);
  CHECK(p.components() == 3);
  const RunResult r = run_experiment(cfg, p, 50, Scheme::bap);
  CHECK(r.trajectory.final_state().values(0, 0) == doctest::Approx(-std::sin(0.1)));
}

TEST_CASE("function registry") {
  FunctionRegistry r = FunctionRegistry::with_builtins();
  CHECK(r.contains("example2_flux"));
  CHECK_THROWS_AS(r.get("nope"), InvalidArgument);
  r.add("cube", [](double x) { return x * x * x; });
  CHECK(r.get("cube")(2.0) == 8.0);
}

TEST_CASE("CSV round trip") {
  const fs::path dir = scratch_dir("csv");
  CsvTable t;
  t.header = {"x", "u"};
  t.rows = {{0.1, 1.0 / 3.0}, {-2.5e-300, 6.02214076e23}, {0.0, -0.0}};
  write_csv((dir / "t.csv").string(), t);
  const CsvTable back = read_csv((dir / "t.csv").string());
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(format_number(1.0 / 3.0) == "3.3333333333333331e-01");

  std::ofstream(dir / "bad.csv") << "x,u\n1.0,abc\n";
  CHECK_THROWS_AS(read_csv((dir / "bad.csv").string()), InvalidArgument);
}

TEST_CASE("solution table layout") {
  const Grid1D g = Grid1D::uniform(0, 1, 4);
  const CsvTable t = solution_table(g, filled(5, 2, 1.5), {"u", "v"});
  CHECK(t.header == std::vector<std::string>{"x", "u", "v"});
  CHECK(t.rows.size() == 5);
  CHECK(t.rows[4][0] == 1.0);
}

TEST_CASE("CLI: list-examples and usage errors") {
  CHECK(cli({"list-examples"}) == 0);
  CHECK(cli({}) == 1);
  CHECK(cli({"frobnicate"}) == 1);
  CHECK(cli({"run"}) == 1);
  CHECK(cli({"run", "--example", "9"}) == 1);
  CHECK(cli({"run", "--example", "1a", "--scheme", "central"}) == 1);
}

TEST_CASE("CLI: convergence writes errors.csv, summary and plot script deterministically") {
  const fs::path a = scratch_dir("conv_a"), b = scratch_dir("conv_b");
  CHECK(cli({"convergence", "--example", "1a", "--nx", "50,100,200", "--out", a.string()}) == 0);
  CHECK(cli({"convergence", "--example", "1a", "--nx", "50,100,200", "--out", b.string()}) == 0);
  const CsvTable t = read_csv((a / "errors.csv").string());
  CHECK(t.header == std::vector<std::string>{"N_x", "h", "L1", "L2", "Linf"});
  CHECK(t.rows.size() == 3);
  CHECK(slurp(a / "errors.csv") == slurp(b / "errors.csv"));
  CHECK(slurp(a / "summary.txt").find("slope L1") != std::string::npos);
  CHECK(fs::exists(a / "plot.gp"));
}

TEST_CASE("CLI: run and compare write CSVs") {
  const fs::path d = scratch_dir("run");
  CHECK(cli({"run", "--example", "1b", "--nx", "40", "--out", d.string()}) == 0);
  CHECK(fs::exists(d / "solution_bap_N40.csv"));
  CHECK(fs::exists(d / "reference_N40.csv"));
  CHECK(read_csv((d / "solution_bap_N40.csv").string()).rows.size() == 41);
  const fs::path c = scratch_dir("cmp");
  CHECK(cli({"compare", "--example", "3", "--out", c.string()}) == 0);
  CHECK(fs::exists(c / "compare.csv"));
  CHECK(slurp(c / "summary.txt").find("bap:") != std::string::npos);
}

TEST_CASE("CLI: config file and failure exit codes") {
  const fs::path d = scratch_dir("cfg");
  std::ofstream(d / "ok.json") << R"({"example": "1b", "nx": [20], "output_dir": ")" << (d / "out").string()
                               << R"("})";
  CHECK(cli({"run", "--config", (d / "ok.json").string()}) == 0);
  CHECK(fs::exists(d / "out" / "solution_bap_N20.csv"));
  std::ofstream(d / "bad.json") << "{\"example\": \"1b\", \"cfl\": }";
  CHECK(cli({"run", "--config", (d / "bad.json").string()}) == 1);
  CHECK(cli({"run", "--config", (d / "ok.json").string(), "--example", "1a"}) == 1);
  // f' changes sign on the data: a numerical failure, exit code 2.
  std::ofstream(d / "sign.json") << R"({"problem": {"model": "jinxin", "flux": "half_u_squared",
      "flux_derivative": "identity", "init_u": "sin", "init_v": "zero", "bc_data": "zero"},
      "domain": [-1, 1], "nx": [20], "t_final": 0.1, "epsilon": 1e-6, "output_dir": ")"
                                 << (d / "sign").string() << R"("})";
  CHECK(cli({"run", "--config", (d / "sign.json").string()}) == 2);
}

TEST_CASE("CLI: gkc-check") {
  CHECK(cli({"gkc-check", "--example", "3"}) == 0);
  CHECK(cli({"gkc-check", "--example", "1a"}) == 0);
  CHECK(cli({"gkc-check", "--example", "5"}) == 1);
}

TEST_CASE("plot scripts reference the CSV files") {
  CHECK(convergence_plot_script().find("errors.csv") != std::string::npos);
  const std::string s = compare_plot_script({"u", "v"}, 4);
  CHECK(s.find("compare.csv") != std::string::npos);
  CHECK(s.find("every 4") != std::string::npos);
}
