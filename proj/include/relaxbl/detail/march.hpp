#pragma once

#include <algorithm>
#include <sstream>
#include <utility>
#include <vector>

namespace relaxbl {

template <class StepFn>
Trajectory march(SolutionState initial, double tau, const RunOptions& opts, StepFn&& step) {
  if (!(opts.t_final >= 0.0)) throw InvalidArgument("run: t_final must be non-negative");
  if (!(tau > 0.0)) throw InvalidArgument("run: time step must be positive");
  const double t0 = initial.time;
  std::vector<double> targets;
  for (double t : opts.output_times)
    if (t > t0 && t < opts.t_final) targets.push_back(t);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(std::max(opts.t_final, t0));

  Trajectory traj;
  traj.tau = tau;
  SolutionState cur = std::move(initial);
  for (double target : targets) {
    while (cur.time < target) {
      const double remaining = target - cur.time;
      const bool last = remaining <= tau * (1.0 + 1e-9);
      SolutionState next = step(cur, last ? remaining : tau);
      next.time = last ? target : cur.time + tau;
      ++traj.steps;
      if (!next.values.all_finite()) {
        std::ostringstream os;
        os << "non-finite value at step " << traj.steps << " (t = " << next.time << ")";
        throw NumericalFailure(os.str());
      }
      cur = std::move(next);
    }
    traj.states.push_back(cur);
  }
  return traj;
}

}  // namespace relaxbl
