#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "covlearn/factor_graph.hpp"
#include "covlearn/noise.hpp"
#include "covlearn/se2.hpp"
#include "covlearn/solver.hpp"
#include "covlearn/synth_data.hpp"

namespace covlearn {

struct TrainConfig {
  int max_outer_iterations = 100;
  /// Frank-Wolfe step schedule alpha = 2 / (fw_m + itr); fw_m >= 2 keeps
  /// alpha <= 1.
  int fw_m = 10;
  /// Relative perturbation: tau_ij = tau_rel * max(theta_ij, lambda_min_ij).
  double tau_rel = 1e-4;
  Bounds bounds;
  int convergence_window = 5;
  double convergence_loss_tolerance = 1e-8;
  bool parallel_perturbations = true;
  /// 0 resolves via threading.hpp rules.
  int threads = 0;
  SolverOptions solver;

  void validate() const;
};

struct TrainIterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double wall_seconds = 0.0;
  double transl_rmse = 0.0;
  double rot_rmse = 0.0;
  double spread = 0.0;
  Eigen::VectorXd theta;
};

struct TrainReport {
  std::string method = "ours";
  std::vector<std::string> classes;
  std::vector<TrainIterationRecord> iterations;
  NoiseParams theta_star;
  double best_loss = 0.0;
  int best_iteration = 0;
  double final_spread = 0.0;
  bool aborted = false;
};

/// Training instances: one factor graph per trajectory plus the ground truth
/// used both as inner-loop initialization and as the tracking target.
struct TrainProblem {
  std::vector<FactorGraph> graphs;
  std::vector<Trajectory> gt;

  int size() const { return static_cast<int>(graphs.size()); }
};

TrainProblem make_train_problem(const Dataset& ds);

/// Per-trajectory tracking loss 0.5 * ||vec(estimate - gt)||^2 with the
/// difference taken pose-wise in the tangent space. Dataset-level losses are
/// means of this over trajectories.
double tracking_loss(const Trajectory& estimate, const Trajectory& gt);

/// Flattened max entry over min entry across all classes.
double eigen_spread(const NoiseParams& theta);

struct JacobianResult {
  /// 3T x m, column (i,j) = vec(f(theta + tau e_ij) - f(theta)) / tau, the
  /// difference again pose-wise.
  Eigen::MatrixXd s;
  bool ok = true;
};

/// Forward-difference solution Jacobian around a converged base solve.
/// Perturbed solves are warm-started from the base estimate. Columns whose
/// perturbed solve fails to converge mark the result not ok.
JacobianResult solution_jacobian(const FactorGraph& g, const NoiseParams& theta,
                                 const std::vector<std::string>& classes,
                                 const SolveResult& base, double tau_rel,
                                 const Eigen::VectorXd& lower,
                                 const SolverOptions& opts, int threads);

/// S^T vec(estimate - gt); dataset gradients are means of this over
/// trajectories.
Eigen::VectorXd loss_gradient(const Eigen::MatrixXd& s,
                              const Trajectory& estimate, const Trajectory& gt);

/// Closed-form vertex of min_s s^T grad over the box: s_k = upper_k where
/// grad_k < 0, else lower_k.
Eigen::VectorXd fw_direction(const Eigen::VectorXd& grad,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper);

/// theta + alpha * (s* - theta) with alpha = 2 / (m + itr). theta outside
/// the box is clamped (with a warning to stderr) before stepping.
Eigen::VectorXd frank_wolfe_step(const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper, int itr, int m);

/// Mean tracking loss over the problem's trajectories at theta, each solved
/// with ground-truth initialization. Shared by the learner and the
/// zero-order baselines so comparisons differ only in the optimizer.
double training_objective(const TrainProblem& prob, const NoiseParams& theta,
                          const SolverOptions& opts);

/// Full outer loop: per iteration solve every trajectory with GT
/// initialization, build the solution Jacobians, assemble the averaged
/// gradient, and take a Frank-Wolfe step. Returns the best-loss iterate.
TrainReport train(const TrainProblem& prob, const NoiseParams& theta0,
                  const TrainConfig& cfg);

}  // namespace covlearn
