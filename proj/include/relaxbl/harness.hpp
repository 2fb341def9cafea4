#pragma once

// Experiment registry for the worked examples, error norms, convergence
// studies, scheme comparisons and CSV / gnuplot emission. The CLI in
// tools/ is a thin wrapper around run_cli().

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relaxbl/grid.hpp"
#include "relaxbl/interface.hpp"
#include "relaxbl/models.hpp"
#include "relaxbl/schemes.hpp"

namespace relaxbl::harness {

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// L1 = h sum |e_j|, L2 = sqrt(h sum |e_j|^2), Linf = max |e_j| over all
/// grid points; |e_j| sums the components. Throws InvalidArgument on a
/// shape mismatch.
ErrorNorms error_norms(const GridFunction& numeric, const GridFunction& reference, double h);

/// Least-squares slope of log(err) against log(h). NaN if fewer than two
/// positive errors.
double fit_slope(const std::vector<double>& h, const std::vector<double>& err);

enum class ReferenceKind { closed_form, fine_mesh, asymptotic_limit };
enum class ProblemKind { jinxin, linear, jinxin_interface, linear_interface };

std::string to_string(ReferenceKind k);
std::string to_string(ProblemKind k);

/// Named one-argument functions, so that configs never carry expressions.
class FunctionRegistry {
 public:
  /// Registry preloaded with the functions used by the worked examples.
  static FunctionRegistry with_builtins();

  void add(const std::string& name, ScalarFn fn);
  bool contains(const std::string& name) const;
  /// Throws InvalidArgument on an unknown name.
  const ScalarFn& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ScalarFn> fns_;
};

/// Problem given in a config file instead of an example id.
struct CustomProblem {
  ProblemKind kind = ProblemKind::jinxin;
  // Jin-Xin: function names for flux, flux_derivative, init_u, init_v
  // ("equilibrium" for v = f(u)) and bc_data.
  std::map<std::string, std::string> functions;
  double bc_u = 1.0;
  double bc_v = 1.0;
  // Linear systems.
  Matrix a;
  Matrix s;
  Matrix b;
  std::vector<std::string> init;     // one name per component
  std::vector<std::string> bc_data;  // one name per boundary row
  /// Interface kinds: eps(x) pieces; the uniform epsilon is used otherwise.
  std::optional<PiecewiseEpsilon> epsilon_profile;
};

struct ExperimentConfig {
  std::string example_id;  // empty for custom problems
  std::optional<CustomProblem> custom;
  Scheme scheme = Scheme::bap;
  double left = 0.0;
  double right = 1.0;
  std::vector<std::size_t> nx;
  double cfl = 0.8;
  /// Uniform relaxation time, or eps0 for the interface examples.
  double epsilon = 1.0;
  int p_exponent = 2;
  double t_final = 0.0;
  std::optional<double> dt;
  std::vector<double> output_times;
  std::string output_dir = ".";
  ReferenceKind reference = ReferenceKind::closed_form;
  double h_fine = 1e-4;  // fine-mesh reference spacing
  AMode a_mode = AMode::derivative;
  std::optional<SwitchRule> switch_rule;
  RightBoundary right_boundary = RightBoundary::extrapolate;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  SchemeConfig scheme_config() const;
};

struct ExampleInfo {
  std::string id;
  std::string title;
  std::string paper_parameters;  // as published
  std::string notes;             // desk-scale changes, if any
  ProblemKind kind = ProblemKind::jinxin;
  ExperimentConfig defaults;
};

const std::vector<ExampleInfo>& example_registry();
/// Throws InvalidArgument on an unknown id.
const ExampleInfo& find_example(const std::string& id);

/// A fully built problem; only the member matching `kind` is populated.
struct Problem {
  ProblemKind kind = ProblemKind::jinxin;
  JinXinModel jinxin;
  LinearRelaxationSystem linear;
  PiecewiseEpsilon eps_profile;
  std::vector<std::string> component_names;

  std::size_t components() const { return component_names.size(); }
  bool is_interface() const {
    return kind == ProblemKind::jinxin_interface || kind == ProblemKind::linear_interface;
  }
};

Problem build_problem(const ExperimentConfig& cfg, const FunctionRegistry& fns = FunctionRegistry::with_builtins());

struct RunResult {
  Grid1D grid;
  Trajectory trajectory;
  std::vector<std::string> component_names;
  double runtime_seconds = 0.0;
};

RunResult run_experiment(const ExperimentConfig& cfg, const Problem& problem, std::size_t nx, Scheme scheme);

/// Reference on `grid` at time t. Fine-mesh references run the upwind
/// scheme on the nested grid of spacing cfg.h_fine.
GridFunction reference_solution(const ExperimentConfig& cfg, const Problem& problem, const Grid1D& grid, double t);

struct ResolutionResult {
  std::size_t nx = 0;
  double h = 0.0;
  ErrorNorms norms;
  double runtime_seconds = 0.0;
  std::string failure;  // empty on success

  bool ok() const { return failure.empty(); }
};

struct ErrorReport {
  std::vector<ResolutionResult> rows;  // ordered as cfg.nx
  ErrorNorms slopes;                   // NaN where undefined
  bool exact = false;                  // every error is zero
  bool complete() const;
};

/// Runs each resolution (concurrently, capped by RELAXBL_THREADS) and fits
/// slopes over all successful ones. Failed runs are annotated, not thrown.
/// Requires at least three resolutions.
ErrorReport convergence_study(const ExperimentConfig& cfg,
                              const FunctionRegistry& fns = FunctionRegistry::with_builtins());

struct SchemeSummary {
  double boundary_error = 0.0;   // max over components at j = 0
  double interior_sup = 0.0;     // j >= 1, outside the interface neighbourhood
  double interface_sup = 0.0;    // within kInterfaceHalfWidth of an interface
  double interface_point = 0.0;  // at the interface point itself
};

inline constexpr std::size_t kInterfaceHalfWidth = 5;

struct CompareReport {
  Grid1D grid;
  double time = 0.0;
  std::vector<std::string> component_names;
  GridFunction reference;
  GridFunction upwind;
  GridFunction bap;
  SchemeSummary upwind_summary;
  SchemeSummary bap_summary;
  std::vector<std::size_t> interface_points;
};

/// Upwind and BAP on the same grid (cfg.nx.front()) against one reference.
CompareReport compare_schemes(const ExperimentConfig& cfg,
                              const FunctionRegistry& fns = FunctionRegistry::with_builtins());

/// Per-point errors against a reference, summarised.
SchemeSummary summarize_errors(const GridFunction& numeric, const GridFunction& reference,
                               const std::vector<std::size_t>& interface_points);

// ---- configs and files ------------------------------------------------------

/// Parses a JSON config. Throws InvalidArgument with line / field context.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Defaults of a registered example.
ExperimentConfig example_config(const std::string& id);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_number(double v);  // %.16e
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);
CsvTable solution_table(const Grid1D& grid, const GridFunction& values, const std::vector<std::string>& names);
CsvTable errors_table(const ErrorReport& report);
CsvTable compare_table(const CompareReport& report);

std::string convergence_summary(const ExperimentConfig& cfg, const ErrorReport& report);
std::string compare_summary(const ExperimentConfig& cfg, const CompareReport& report);
/// gnuplot script plotting errors.csv on log-log axes.
std::string convergence_plot_script();
/// gnuplot script plotting compare.csv; every `stride`-th point is drawn.
std::string compare_plot_script(const std::vector<std::string>& names, std::size_t stride);

/// Exit codes: 0 success, 1 usage or config error, 2 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace relaxbl::harness
