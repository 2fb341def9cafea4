// JSON config parsing and the command-line front end.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "relaxbl/harness.hpp"

namespace relaxbl::harness {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
  throw InvalidArgument("config field '" + field + "': " + what);
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "expected a number");
  return j.get<double>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_numbers(const json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_number(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

std::vector<std::string> get_strings(const json& j, const std::string& field) {
  if (!j.is_array()) field_error(field, "expected an array of function names");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(get_string(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

Matrix get_matrix(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) field_error(field, "expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < j.size(); ++k) rows.push_back(get_numbers(j[k], field + "[" + std::to_string(k) + "]"));
  const std::size_t cols = rows.front().size();
  if (cols == 0) field_error(field, "rows must not be empty");
  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) field_error(field, "rows have different lengths");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = rows[i][c];
  }
  return m;
}

template <class E>
E get_enum(const json& j, const std::string& field, std::initializer_list<std::pair<const char*, E>> options) {
  const std::string s = get_string(j, field);
  std::string valid;
  for (const auto& [name, value] : options) {
    if (s == name) return value;
    valid += valid.empty() ? name : std::string(", ") + name;
  }
  field_error(field, "'" + s + "' is not one of " + valid);
}

Scheme parse_scheme(const json& j, const std::string& field) {
  return get_enum<Scheme>(j, field, {{"upwind", Scheme::upwind}, {"bap", Scheme::bap}});
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k)
    if (text[k] == '\n') ++line;
  return line;
}

CustomProblem parse_problem(const json& p) {
  if (!p.is_object()) field_error("problem", "expected an object");
  CustomProblem c;
  if (!p.contains("model")) field_error("problem.model", "is required");
  c.kind = get_enum<ProblemKind>(p["model"], "problem.model",
                                 {{"jinxin", ProblemKind::jinxin},
                                  {"linear", ProblemKind::linear},
                                  {"jinxin_interface", ProblemKind::jinxin_interface},
                                  {"linear_interface", ProblemKind::linear_interface}});
  const bool jx = c.kind == ProblemKind::jinxin || c.kind == ProblemKind::jinxin_interface;
  for (auto it = p.begin(); it != p.end(); ++it) {
    const std::string key = it.key();
    const std::string field = "problem." + key;
    const json& v = it.value();
    if (key == "model") continue;
    if (jx && (key == "flux" || key == "flux_derivative" || key == "init_u" || key == "init_v" || key == "bc_data")) {
      c.functions[key] = get_string(v, field);
    } else if (jx && key == "bc_u") {
      c.bc_u = get_number(v, field);
    } else if (jx && key == "bc_v") {
      c.bc_v = get_number(v, field);
    } else if (!jx && key == "a") {
      c.a = get_matrix(v, field);
    } else if (!jx && key == "s") {
      c.s = get_matrix(v, field);
    } else if (!jx && key == "b") {
      c.b = get_matrix(v, field);
    } else if (!jx && key == "init") {
      c.init = get_strings(v, field);
    } else if (!jx && key == "bc_data") {
      c.bc_data = get_strings(v, field);
    } else if (key == "epsilon_profile") {
      if (!v.is_object() || !v.contains("breakpoints") || !v.contains("values"))
        field_error(field, "expected {\"breakpoints\": [...], \"values\": [...]}");
      PiecewiseEpsilon e;
      e.breakpoints = get_numbers(v["breakpoints"], field + ".breakpoints");
      e.values = get_numbers(v["values"], field + ".values");
      try {
        e.validate();
      } catch (const InvalidArgument& ex) {
        field_error(field, ex.what());
      }
      c.epsilon_profile = e;
    } else {
      field_error(field, "unknown field for model '" + to_string(c.kind) + "'");
    }
  }
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: JSON syntax error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                          e.what());
  }
  if (!doc.is_object()) throw InvalidArgument("config: top level must be an object");

  ExperimentConfig cfg;
  if (doc.contains("example")) {
    if (doc.contains("problem")) throw InvalidArgument("config: 'example' and 'problem' are mutually exclusive");
    cfg = example_config(get_string(doc["example"], "example"));
  } else if (doc.contains("problem")) {
    cfg.custom = parse_problem(doc["problem"]);
    cfg.reference = ReferenceKind::fine_mesh;
  } else {
    throw InvalidArgument("config: either 'example' or 'problem' is required");
  }

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "example" || key == "problem") continue;
    if (key == "scheme") {
      cfg.scheme = parse_scheme(v, key);
    } else if (key == "domain") {
      const auto d = get_numbers(v, key);
      if (d.size() != 2) field_error(key, "expected [left, right]");
      cfg.left = d[0];
      cfg.right = d[1];
    } else if (key == "nx") {
      cfg.nx.clear();
      for (double n : get_numbers(v, key)) {
        if (n < 1 || n != std::floor(n)) field_error(key, "entries must be positive integers");
        cfg.nx.push_back(static_cast<std::size_t>(n));
      }
    } else if (key == "cfl") {
      cfg.cfl = get_number(v, key);
    } else if (key == "epsilon") {
      cfg.epsilon = get_number(v, key);
    } else if (key == "p") {
      const double p = get_number(v, key);
      if (p != std::floor(p)) field_error(key, "must be an integer");
      cfg.p_exponent = static_cast<int>(p);
    } else if (key == "t_final") {
      cfg.t_final = get_number(v, key);
    } else if (key == "dt") {
      if (v.is_null()) cfg.dt.reset();
      else cfg.dt = get_number(v, key);
    } else if (key == "output_times") {
      cfg.output_times = get_numbers(v, key);
    } else if (key == "output_dir") {
      cfg.output_dir = get_string(v, key);
    } else if (key == "reference") {
      cfg.reference = get_enum<ReferenceKind>(v, key,
                                              {{"closed_form", ReferenceKind::closed_form},
                                               {"fine_mesh", ReferenceKind::fine_mesh},
                                               {"asymptotic_limit", ReferenceKind::asymptotic_limit}});
    } else if (key == "h_fine") {
      cfg.h_fine = get_number(v, key);
    } else if (key == "a_mode") {
      cfg.a_mode = get_enum<AMode>(v, key, {{"derivative", AMode::derivative}, {"sign", AMode::sign}});
    } else if (key == "switch_rule") {
      cfg.switch_rule = get_enum<SwitchRule>(
          v, key, {{"smooth_eta", SwitchRule::smooth_eta}, {"hard_tau_eps", SwitchRule::hard_tau_eps}});
    } else if (key == "right_boundary") {
      cfg.right_boundary = get_enum<RightBoundary>(
          v, key,
          {{"reference_dirichlet", RightBoundary::reference_dirichlet}, {"extrapolate", RightBoundary::extrapolate}});
    } else {
      field_error(key, "unknown field");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return config_from_json(ss.str());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

// ---- CLI --------------------------------------------------------------------

namespace {

namespace fs = std::filesystem;

struct CliOptions {
  std::string config;
  std::string example;
  std::string out;
  std::vector<std::size_t> nx;
  std::optional<double> eps;
  std::optional<int> p;
  std::string scheme;
};

void add_common(CLI::App* sub, CliOptions& o) {
  sub->add_option("--config", o.config, "JSON config file");
  sub->add_option("--example", o.example, "registered example id");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--nx", o.nx, "comma-separated cell counts")->delimiter(',');
  sub->add_option("--eps", o.eps, "relaxation time (eps0 for interface examples)");
  sub->add_option("--p", o.p, "exponent p in eta = (tau/eps)^p");
  sub->add_option("--scheme", o.scheme, "upwind or bap")->check(CLI::IsMember({"upwind", "bap"}));
}

ExperimentConfig resolve_config(const CliOptions& o) {
  if (!o.config.empty() && !o.example.empty()) throw InvalidArgument("use either --config or --example, not both");
  if (o.config.empty() && o.example.empty()) throw InvalidArgument("one of --config or --example is required");
  ExperimentConfig cfg = o.config.empty() ? example_config(o.example) : load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.nx.empty()) cfg.nx = o.nx;
  if (o.eps) cfg.epsilon = *o.eps;
  if (o.p) cfg.p_exponent = *o.p;
  if (!o.scheme.empty()) cfg.scheme = o.scheme == "upwind" ? Scheme::upwind : Scheme::bap;
  cfg.validate();
  return cfg;
}

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidArgument("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  out << text;
}

int cmd_run(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const Problem problem = build_problem(cfg);
  std::ostringstream summary;
  summary << "scheme: " << to_string(cfg.scheme) << "\n";
  for (std::size_t nx : cfg.nx) {
    const RunResult run = run_experiment(cfg, problem, nx, cfg.scheme);
    const std::string stem = "solution_" + to_string(cfg.scheme) + "_N" + std::to_string(nx);
    const auto& states = run.trajectory.states;
    for (std::size_t k = 0; k < states.size(); ++k) {
      const bool last = k + 1 == states.size();
      const std::string name = last ? stem + ".csv" : stem + "_out" + std::to_string(k) + ".csv";
      write_csv((dir / name).string(), solution_table(run.grid, states[k].values, run.component_names));
    }
    summary << "N_x " << nx << ": steps " << run.trajectory.steps << ", tau " << format_number(run.trajectory.tau)
            << ", runtime_s " << run.runtime_seconds;
    try {
      const GridFunction ref = reference_solution(cfg, problem, run.grid, run.trajectory.final_state().time);
      write_csv((dir / ("reference_N" + std::to_string(nx) + ".csv")).string(),
                solution_table(run.grid, ref, run.component_names));
      const ErrorNorms e = error_norms(run.trajectory.final_state().values, ref, run.grid.h);
      summary << ", L1 " << format_number(e.l1) << ", L2 " << format_number(e.l2) << ", Linf "
              << format_number(e.linf);
    } catch (const InvalidArgument& e) {
      summary << ", no reference (" << e.what() << ")";
    }
    summary << "\n";
  }
  write_text(dir / "summary.txt", summary.str());
  std::cout << summary.str();
  return 0;
}

int cmd_convergence(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const ErrorReport rep = convergence_study(cfg);
  write_csv((dir / "errors.csv").string(), errors_table(rep));
  const std::string summary = convergence_summary(cfg, rep);
  write_text(dir / "summary.txt", summary);
  write_text(dir / "plot.gp", convergence_plot_script());
  std::cout << summary;
  return rep.complete() ? 0 : 2;
}

int cmd_compare(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const CompareReport rep = compare_schemes(cfg);
  write_csv((dir / "compare.csv").string(), compare_table(rep));
  const std::string summary = compare_summary(cfg, rep);
  write_text(dir / "summary.txt", summary);
  const std::size_t stride = std::max<std::size_t>(1, rep.grid.cells() / 50);
  write_text(dir / "plot.gp", compare_plot_script(rep.component_names, stride));
  std::cout << summary;
  return 0;
}

int cmd_gkc(const ExperimentConfig& cfg) {
  const Problem problem = build_problem(cfg);
  LinearRelaxationSystem sys;
  if (problem.kind == ProblemKind::linear) {
    sys = problem.linear;
  } else if (problem.kind == ProblemKind::jinxin) {
    // Frozen coefficient a = f'(0) in the linear variables (u, w).
    const JinXinModel& m = problem.jinxin;
    sys = jinxin_as_linear(m.flux_derivative(0.0), m.epsilon, m.bc_u, m.bc_v);
  } else {
    throw InvalidArgument("gkc-check needs a boundary problem; interface problems have no boundary condition");
  }
  const GkcResult r = gkc_sample_ratio(sys, default_gkc_samples());
  std::cout << "minimum sampled GKC ratio: " << format_number(r.min_ratio) << "\n"
            << "at xi = " << r.argmin.xi << ", eta = " << r.argmin.eta << "\n"
            << "samples evaluated: " << r.evaluated << ", skipped: " << r.skipped.size() << "\n"
            << (r.min_ratio > 0.0 ? "condition holds on the sample grid\n" : "condition violated on the sample grid\n");
  return 0;
}

int cmd_list() {
  for (const auto& e : example_registry()) {
    std::cout << e.id << "  " << e.title << "\n    parameters: " << e.paper_parameters << "\n";
    if (!e.notes.empty()) std::cout << "    " << e.notes << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"relaxbl: boundary asymptotic-preserving schemes for relaxation systems"};
  app.require_subcommand(1);
  CliOptions o;
  CLI::App* run = app.add_subcommand("run", "run one scheme and write solution CSVs");
  CLI::App* conv = app.add_subcommand("convergence", "convergence study, errors.csv and fitted slopes");
  CLI::App* cmp = app.add_subcommand("compare", "upwind versus BAP on the same grid");
  CLI::App* gkc = app.add_subcommand("gkc-check", "sampled generalized Kreiss condition");
  app.add_subcommand("list-examples", "list the registered examples");
  for (CLI::App* s : {run, conv, cmp, gkc}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list-examples")) return cmd_list();
    const ExperimentConfig cfg = resolve_config(o);
    if (run->parsed()) return cmd_run(cfg);
    if (conv->parsed()) return cmd_convergence(cfg);
    if (cmp->parsed()) return cmd_compare(cfg);
    if (gkc->parsed()) return cmd_gkc(cfg);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace relaxbl::harness
