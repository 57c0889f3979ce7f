#include "covlearn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace covlearn {

Rmse rmse(const Trajectory& est, const Trajectory& gt) {
  if (est.size() != gt.size()) {
    throw std::invalid_argument("rmse: trajectory length mismatch");
  }
  if (est.empty()) {
    throw std::invalid_argument("rmse: empty trajectory");
  }
  double sq_transl = 0.0;
  double sq_rot = 0.0;
  for (size_t t = 0; t < est.size(); ++t) {
    const double dx = est[t].x - gt[t].x;
    const double dy = est[t].y - gt[t].y;
    const double da = wrap_angle(est[t].theta - gt[t].theta);
    sq_transl += dx * dx + dy * dy;
    sq_rot += da * da;
  }
  const double n = static_cast<double>(est.size());
  Rmse out;
  out.transl = std::sqrt(sq_transl / n);
  out.rot = std::sqrt(sq_rot / n);
  return out;
}

EvalResult evaluate_dataset(const NoiseParams& theta, const Dataset& ds,
                            const SolverOptions& opts) {
  EvalResult out;
  out.per_trajectory.reserve(ds.test.size());
  double sum_transl = 0.0;
  double sum_rot = 0.0;
  for (const auto& traj : ds.test) {
    const FactorGraph g = build_graph(traj);
    const Trajectory x0 = dead_reckoning_init(traj);
    const SolveResult r = solve(g, x0, theta, opts);
    const Rmse m = rmse(r.estimate, traj.gt);
    sum_transl += m.transl;
    sum_rot += m.rot;
    out.per_trajectory.push_back(m);
  }
  if (!out.per_trajectory.empty()) {
    const double n = static_cast<double>(out.per_trajectory.size());
    out.mean.transl = sum_transl / n;
    out.mean.rot = sum_rot / n;
  }
  return out;
}

}  // namespace covlearn
