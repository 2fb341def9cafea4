#include "relaxbl/grid.hpp"

#include <cmath>
#include <sstream>

namespace relaxbl {

Grid1D Grid1D::uniform(double left, double right, std::size_t cells) {
  if (!(right > left)) throw InvalidArgument("Grid1D::uniform: empty interval");
  if (cells < 2) throw InvalidArgument("Grid1D::uniform: need at least 2 cells");
  return Grid1D{left, (right - left) / static_cast<double>(cells), cells + 1};
}

void Grid1D::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("Grid1D: mesh width must be positive");
  if (num_points < 3) throw InvalidArgument("Grid1D: need at least 3 points");
}

std::vector<double> GridFunction::component(std::size_t c) const {
  std::vector<double> out(points_);
  for (std::size_t j = 0; j < points_; ++j) out[j] = data_[j * comps_ + c];
  return out;
}

bool GridFunction::all_finite() const {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

void SchemeConfig::validate() const {
  std::ostringstream os;
  if (!(cfl > 0.0 && cfl <= 1.0)) os << "cfl must lie in (0, 1], got " << cfl << "; ";
  if (p_exponent < 2) os << "p_exponent must be >= 2, got " << p_exponent << "; ";
  if (!(newton_tol > 0.0)) os << "newton_tol must be positive; ";
  if (newton_max_iters < 1) os << "newton_max_iters must be >= 1; ";
  if (!os.str().empty()) throw InvalidArgument("SchemeConfig: " + os.str());
}

std::string to_string(Scheme s) { return s == Scheme::bap ? "bap" : "upwind"; }
std::string to_string(AMode m) { return m == AMode::sign ? "sign" : "derivative"; }
std::string to_string(RightBoundary b) {
  return b == RightBoundary::reference_dirichlet ? "reference_dirichlet" : "extrapolate";
}
std::string to_string(SwitchRule r) { return r == SwitchRule::hard_tau_eps ? "hard_tau_eps" : "smooth_eta"; }

}  // namespace relaxbl
