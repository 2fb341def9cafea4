#pragma once

// Relaxation systems with a piecewise-constant relaxation time eps(x),
// solved by one unified scheme on the whole line.

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "relaxbl/grid.hpp"
#include "relaxbl/models.hpp"
#include "relaxbl/schemes.hpp"

namespace relaxbl {

/// eps(x) = values[k] on [breakpoints[k-1], breakpoints[k]); a breakpoint
/// belongs to the piece on its right.
struct PiecewiseEpsilon {
  std::vector<double> breakpoints;
  std::vector<double> values;

  static PiecewiseEpsilon constant(double eps);
  /// eps_left for x < at, eps_right for x >= at.
  static PiecewiseEpsilon jump(double at, double eps_left, double eps_right);

  void validate() const;
  double operator()(double x) const;
  double min_value() const;
};

/// One-sided limits (eps(x-), eps(x+)).
std::pair<double, double> epsilon_limits(const PiecewiseEpsilon& eps, double x);

struct InterfaceGrid {
  Grid1D grid;
  std::vector<double> eps_left;   // eps(x_j-)
  std::vector<double> eps_right;  // eps(x_j+), also the point value
  std::vector<std::string> warnings;

  /// Breakpoints off the grid are snapped to the nearest grid point, with a
  /// warning recorded.
  static InterfaceGrid build(const Grid1D& grid, const PiecewiseEpsilon& eps);
  /// Indices j with eps_left[j] != eps_right[j].
  std::vector<std::size_t> interface_points() const;
};

/// Row blocks L-^{r,j} (n_minus x n) and L+^{l,j} (n_plus x n).
struct InterfaceOperators {
  Matrix l_minus_right;
  Matrix l_plus_left;
};

InterfaceOperators select_operators(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                                    double eps_left, double eps_right, double tau, const SchemeConfig& config = {});

struct JinXinInterfaceOperators {
  std::array<double, 2> l_minus_right;
  std::array<double, 2> l_plus_left;
};

JinXinInterfaceOperators select_operators(double a, double eps_left, double eps_right, double tau,
                                          const SchemeConfig& config = {});

/// Per-point stacked solves for the linear interface scheme, cached per
/// distinct (eps_left, eps_right) pair.
class LinearInterfaceStepper {
 public:
  LinearInterfaceStepper(const LinearRelaxationSystem& sys, const DerivedStructure& derived, const InterfaceGrid& igrid,
                         double tau, const SchemeConfig& config);
  SolutionState step(const SolutionState& state) const;

 private:
  struct PointSystem {
    Matrix right_state, right_diff;  // L-^r A^{-1}, lambda L-^r
    Matrix left_state, left_diff;    // L+^l A^{-1}, lambda L+^l
    LuFactorization<double> lu;
  };
  LinearRelaxationSystem sys_;
  InterfaceGrid igrid_;
  double tau_;
  SchemeConfig config_;
  std::map<std::pair<double, double>, PointSystem> systems_;
};

SolutionState interface_step(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                             const InterfaceGrid& igrid, const SolutionState& state, double tau,
                             const SchemeConfig& config = {});
/// Jin-Xin interface scheme with a Newton solve per point; model.epsilon is
/// ignored in favour of the grid's one-sided limits.
SolutionState interface_step(const JinXinModel& model, const InterfaceGrid& igrid, const SolutionState& state,
                             double tau, const SchemeConfig& config = {});

/// Classical upwind IMEX with the pointwise relaxation time eps(x_j).
SolutionState interface_upwind_step(const LinearRelaxationSystem& sys, const SpectralSplit& split_a,
                                    const InterfaceGrid& igrid, const SolutionState& state, double tau,
                                    const SchemeConfig& config = {});
SolutionState interface_upwind_step(const JinXinModel& model, const InterfaceGrid& igrid, const SolutionState& state,
                                    double tau, const SchemeConfig& config = {});

Trajectory run_interface(const LinearRelaxationSystem& sys, Scheme scheme, const InterfaceGrid& igrid,
                         const RunOptions& opts, const SchemeConfig& config = {});
Trajectory run_interface(const JinXinModel& model, Scheme scheme, const InterfaceGrid& igrid, const RunOptions& opts,
                         const SchemeConfig& config = {});

}  // namespace relaxbl
