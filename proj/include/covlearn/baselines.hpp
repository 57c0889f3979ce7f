#pragma once

#include <functional>

#include <Eigen/Core>

#include "covlearn/learner.hpp"
#include "covlearn/noise.hpp"

namespace covlearn {

enum class ZeroOrderMethod { NelderMead, Powell };

struct ZeroOrderOptions {
  ZeroOrderMethod method = ZeroOrderMethod::NelderMead;
  int max_evaluations = 500;
  /// Initial simplex offset per coordinate: simplex_scale * theta0_k.
  double simplex_scale = 0.1;
  double function_tolerance = 1e-8;
  double parameter_tolerance = 1e-8;
  Bounds bounds;

  void validate() const;
};

struct ZeroOrderResult {
  Eigen::VectorXd theta;
  double value = 0.0;
  int evaluations = 0;
  /// False when the evaluation budget ran out before the tolerances fired.
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Nelder-Mead simplex with coefficients 1 / 2 / 0.5 / 0.5 (reflection,
/// expansion, contraction, shrink). Candidate vertices are clipped into the
/// box. Returns the best vertex found.
ZeroOrderResult nelder_mead(const Objective& objective,
                            const Eigen::VectorXd& theta0,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper,
                            const ZeroOrderOptions& opts);

/// Powell direction-set method with golden-section line searches restricted
/// to the feasible segment inside the box.
ZeroOrderResult powell(const Objective& objective, const Eigen::VectorXd& theta0,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper,
                       const ZeroOrderOptions& opts);

/// Runs a zero-order method on the learner's training objective and reports
/// it in the same shape as train(): one record per objective evaluation,
/// best-so-far selection, method tag "nelder-mead" or "powell".
TrainReport train_zero_order(const TrainProblem& prob, const NoiseParams& theta0,
                             const TrainConfig& cfg,
                             const ZeroOrderOptions& opts);

}  // namespace covlearn
