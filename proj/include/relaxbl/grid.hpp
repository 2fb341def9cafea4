#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relaxbl/errors.hpp"

namespace relaxbl {

/// Uniform grid x_j = x0 + j h, j = 0 .. num_points - 1.
struct Grid1D {
  double x0 = 0.0;
  double h = 1.0;
  std::size_t num_points = 0;

  /// Grid with `cells` cells covering [left, right].
  static Grid1D uniform(double left, double right, std::size_t cells);

  double x(std::size_t j) const { return x0 + static_cast<double>(j) * h; }
  double right() const { return x(num_points - 1); }
  std::size_t cells() const { return num_points - 1; }
  void validate() const;
};

/// Point-major storage of an n-component grid function.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::size_t num_points, std::size_t components)
      : points_(num_points), comps_(components), data_(num_points * components, 0.0) {}

  std::size_t num_points() const { return points_; }
  std::size_t components() const { return comps_; }

  std::span<double> at(std::size_t j) { return {data_.data() + j * comps_, comps_}; }
  std::span<const double> at(std::size_t j) const { return {data_.data() + j * comps_, comps_}; }
  double& operator()(std::size_t j, std::size_t c) { return data_[j * comps_ + c]; }
  double operator()(std::size_t j, std::size_t c) const { return data_[j * comps_ + c]; }

  std::vector<double> component(std::size_t c) const;
  std::span<const double> raw() const { return data_; }
  bool all_finite() const;

  bool operator==(const GridFunction&) const = default;

 private:
  std::size_t points_ = 0;
  std::size_t comps_ = 0;
  std::vector<double> data_;
};

struct SolutionState {
  double time = 0.0;
  GridFunction values;
};

enum class AMode { derivative, sign };
enum class RightBoundary { reference_dirichlet, extrapolate };
enum class SwitchRule { smooth_eta, hard_tau_eps };
enum class Scheme { upwind, bap };

struct SchemeConfig {
  double cfl = 0.8;
  int p_exponent = 2;  // eta = (tau / eps)^p
  AMode a_mode = AMode::derivative;
  RightBoundary right_boundary = RightBoundary::extrapolate;
  double newton_tol = 1e-12;
  int newton_max_iters = 50;
  /// Unset: smooth eta for the Jin-Xin model, hard tau/eps switch for
  /// general linear systems.
  std::optional<SwitchRule> switch_rule;

  void validate() const;
};

/// Above this tau/eps ratio the eta -> infinity limit operators are used
/// directly, since (tau/eps)^p is no longer representable in a useful way.
inline constexpr double kEtaLimitRatio = 1e8;

std::string to_string(Scheme s);
std::string to_string(AMode m);
std::string to_string(RightBoundary b);
std::string to_string(SwitchRule r);

}  // namespace relaxbl
