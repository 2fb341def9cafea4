#pragma once

// First-order upwind IMEX and boundary asymptotic-preserving (BAP) steps for
// the Jin-Xin model and for general linear relaxation systems.

#include <array>
#include <optional>
#include <vector>

#include "relaxbl/grid.hpp"
#include "relaxbl/linalg.hpp"
#include "relaxbl/models.hpp"

namespace relaxbl {

/// Eigen-decomposition of M(eta) = A^{-1}(I - eta Q) for the Jin-Xin model,
/// Q = [[0, 0], [a, -1]] being the source Jacobian with f' replaced by a:
/// M = [[-eta a, 1 + eta], [1, 0]].
struct EtaDecomposition {
  double a = 0.0;
  double eta = 0.0;  // +inf for the limit operators
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  std::array<double, 2> l_plus{};
  std::array<double, 2> l_minus{};
  std::array<double, 2> r_plus{};
  std::array<double, 2> r_minus{};
};

/// Closed-form eigenpairs; eta = +inf gives the limit vectors. Throws
/// DegenerateSign for a = 0 and InvalidArgument for negative eta.
EtaDecomposition m_eta_decompose(double a, double eta);

/// Effective eta = (tau/eps)^p, or +inf above kEtaLimitRatio.
double effective_eta(double tau, double eps, int p);

/// Resolved switch rule (config value or the per-model default).
SwitchRule switch_rule_for_jinxin(const SchemeConfig& cfg);
SwitchRule switch_rule_for_linear(const SchemeConfig& cfg);

// ---- Jin-Xin ----------------------------------------------------------------

SolutionState jinxin_initial_state(const JinXinModel& model, const Grid1D& grid);

SolutionState jinxin_upwind_step(const JinXinModel& model, const Grid1D& grid, const SolutionState& state,
                                 double tau, const SchemeConfig& config = {});
SolutionState jinxin_bap_step(const JinXinModel& model, const Grid1D& grid, const SolutionState& state,
                              double tau, const SchemeConfig& config = {});

// ---- general linear systems -----------------------------------------------

SolutionState linear_initial_state(const LinearRelaxationSystem& sys, const Grid1D& grid);

/// Caches the flux-splitting matrices, the implicit source inverse and the
/// boundary factorization for one (system, grid, tau) combination.
class LinearStepper {
 public:
  enum class BoundaryForm { upwind, bap };

  LinearStepper(const LinearRelaxationSystem& sys, const SpectralSplit& split, BoundaryForm form,
                const Grid1D& grid, double tau, const SchemeConfig& config);

  SolutionState step(const SolutionState& state) const;
  double tau() const { return tau_; }

 private:
  LinearRelaxationSystem sys_;
  Grid1D grid_;
  double tau_;
  double lambda_;
  SchemeConfig config_;
  Matrix a_plus_, a_minus_;   // A R+ L+, A R- L-
  Matrix implicit_inv_;       // (I - kappa Q)^{-1}
  Matrix bnd_state_rows_;     // rows applied to U_0^n
  Matrix bnd_diff_rows_;      // rows applied to U_1^n - U_0^n (already scaled by lambda)
  std::optional<LuFactorization<double>> bnd_lu_;
};

SolutionState linear_upwind_step(const LinearRelaxationSystem& sys, const SpectralSplit& split_a,
                                 const Grid1D& grid, const SolutionState& state, double tau,
                                 const SchemeConfig& config = {});
SolutionState linear_bap_step(const LinearRelaxationSystem& sys, const DerivedStructure& derived,
                              const Grid1D& grid, const SolutionState& state, double tau,
                              const SchemeConfig& config = {});

/// Split used by the BAP scheme at this tau: R^A when tau < eps, R^inf
/// otherwise (hard rule); the numerical split of M(1, (tau/eps)^p) under the
/// smooth rule.
SpectralSplit linear_bap_split(const LinearRelaxationSystem& sys, const DerivedStructure& derived, double tau,
                               double eps, const SchemeConfig& config);

// ---- driver -----------------------------------------------------------------

struct RunOptions {
  double t_final = 0.0;
  std::optional<double> dt;          // overrides cfl * h / max speed
  std::vector<double> output_times;  // t_final is always recorded
};

struct Trajectory {
  std::vector<SolutionState> states;
  std::size_t steps = 0;
  double tau = 0.0;

  const SolutionState& final_state() const { return states.back(); }
};

/// Time step from the config, or the explicit override.
double choose_time_step(const Grid1D& grid, double max_speed, const RunOptions& opts, const SchemeConfig& cfg);

/// Marches an arbitrary step function to t_final, shortening steps so that
/// every output time is hit exactly. Aborts with NumericalFailure on the first
/// non-finite value.
template <class StepFn>
Trajectory march(SolutionState initial, double tau, const RunOptions& opts, StepFn&& step);

Trajectory run_ibvp(const JinXinModel& model, Scheme scheme, const Grid1D& grid, const RunOptions& opts,
                    const SchemeConfig& config = {});
Trajectory run_ibvp(const LinearRelaxationSystem& sys, Scheme scheme, const Grid1D& grid,
                    const RunOptions& opts, const SchemeConfig& config = {});

/// Largest |lambda(A)|.
double max_speed(const Matrix& a);

}  // namespace relaxbl

#include "relaxbl/detail/march.hpp"
