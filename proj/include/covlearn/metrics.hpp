#pragma once

#include <vector>

#include "covlearn/noise.hpp"
#include "covlearn/se2.hpp"
#include "covlearn/solver.hpp"
#include "covlearn/synth_data.hpp"

namespace covlearn {

struct Rmse {
  double transl = 0.0;
  double rot = 0.0;
};

/// Pose-wise RMSE against ground truth: translation over Euclidean (x, y)
/// errors, rotation over normalized angular differences. No trajectory
/// alignment is performed; estimates and GT share a frame.
Rmse rmse(const Trajectory& est, const Trajectory& gt);

struct EvalResult {
  std::vector<Rmse> per_trajectory;
  Rmse mean;
};

/// Solves every test trajectory with dead-reckoning initialization and
/// reports per-trajectory and mean RMSE.
EvalResult evaluate_dataset(const NoiseParams& theta, const Dataset& ds,
                            const SolverOptions& opts = {});

}  // namespace covlearn
