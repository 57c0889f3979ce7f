#pragma once

#include <Eigen/Core>

#include "covlearn/factor_graph.hpp"
#include "covlearn/noise.hpp"
#include "covlearn/se2.hpp"

namespace covlearn {

struct SolverOptions {
  int max_iterations = 100;
  double initial_damping = 1e-4;
  double damping_increase = 10.0;
  double damping_decrease = 0.1;
  double min_damping = 1e-12;
  double max_damping = 1e12;
  double error_decrease_tolerance = 1e-10;
  double step_norm_tolerance = 1e-10;
  /// Converged means the final ||A^T b||_inf falls below this.
  double gradient_tolerance = 1e-6;

  void validate() const;
};

struct SolveResult {
  Trajectory estimate;
  double final_error = 0.0;
  int iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;
};

/// Damped Gauss-Newton step: solves (A^T A + damping*I) d = A^T b by dense
/// Cholesky. Throws std::runtime_error when the factorization fails, which
/// the LM loop answers by raising the damping.
Eigen::VectorXd gauss_newton_step(const SparseSystem& sys, double damping);

/// Batch Levenberg-Marquardt on the whitened NLLS objective. Steps are
/// applied per pose via left-oplus retraction; a step is accepted only when
/// it strictly decreases total_error. Deterministic: identical inputs give
/// bit-identical outputs.
SolveResult solve(const FactorGraph& g, const Trajectory& x0,
                  const NoiseParams& theta, const SolverOptions& opts = {});

}  // namespace covlearn
