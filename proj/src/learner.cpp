#include "covlearn/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>

#include "covlearn/errors.hpp"
#include "covlearn/metrics.hpp"
#include "covlearn/threading.hpp"

namespace covlearn {

void TrainConfig::validate() const {
  if (max_outer_iterations < 1) {
    throw ConfigError("TrainConfig: max_outer_iterations must be >= 1");
  }
  if (fw_m < 2) {
    throw ConfigError("TrainConfig: fw_m must be >= 2 so the step size "
                      "stays <= 1");
  }
  if (!(tau_rel > 0.0)) {
    throw ConfigError("TrainConfig: tau_rel must be positive");
  }
  if (convergence_window < 1 || !(convergence_loss_tolerance > 0.0)) {
    throw ConfigError("TrainConfig: bad convergence window settings");
  }
  bounds.validate();
  solver.validate();
}

TrainProblem make_train_problem(const Dataset& ds) {
  TrainProblem prob;
  prob.graphs.reserve(ds.train.size());
  prob.gt.reserve(ds.train.size());
  for (const auto& traj : ds.train) {
    prob.graphs.push_back(build_graph(traj));
    prob.gt.push_back(traj.gt);
  }
  return prob;
}

double tracking_loss(const Trajectory& estimate, const Trajectory& gt) {
  return 0.5 * trajectory_delta(estimate, gt).squaredNorm();
}

double eigen_spread(const NoiseParams& theta) {
  const Eigen::VectorXd flat = theta.flatten();
  if (flat.size() == 0) {
    throw std::invalid_argument("eigen_spread: empty parameters");
  }
  return flat.maxCoeff() / flat.minCoeff();
}

JacobianResult solution_jacobian(const FactorGraph& g, const NoiseParams& theta,
                                 const std::vector<std::string>& classes,
                                 const SolveResult& base, double tau_rel,
                                 const Eigen::VectorXd& lower,
                                 const SolverOptions& opts, int threads) {
  const Eigen::VectorXd flat = theta.flatten();
  const Eigen::Index m = flat.size();
  if (lower.size() != m) {
    throw std::invalid_argument("solution_jacobian: bounds size mismatch");
  }
  JacobianResult out;
  out.s.resize(3 * static_cast<Eigen::Index>(base.estimate.size()), m);
  std::vector<char> column_ok(static_cast<size_t>(m), 1);

  parallel_for(static_cast<int>(m), threads, [&](int j) {
    const double tau = tau_rel * std::max(flat[j], lower[j]);
    Eigen::VectorXd perturbed = flat;
    perturbed[j] += tau;
    const NoiseParams theta_j = NoiseParams::unflatten(classes, perturbed);
    const SolveResult r = solve(g, base.estimate, theta_j, opts);
    if (!r.converged) {
      column_ok[static_cast<size_t>(j)] = 0;
    }
    out.s.col(j) = trajectory_delta(r.estimate, base.estimate) / tau;
  });

  out.ok = std::all_of(column_ok.begin(), column_ok.end(),
                       [](char c) { return c != 0; });
  return out;
}

Eigen::VectorXd loss_gradient(const Eigen::MatrixXd& s,
                              const Trajectory& estimate,
                              const Trajectory& gt) {
  const Eigen::VectorXd delta = trajectory_delta(estimate, gt);
  if (s.rows() != delta.size()) {
    throw std::invalid_argument("loss_gradient: dimension mismatch");
  }
  return s.transpose() * delta;
}

Eigen::VectorXd fw_direction(const Eigen::VectorXd& grad,
                             const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper) {
  if (grad.size() != lower.size() || grad.size() != upper.size()) {
    throw std::invalid_argument("fw_direction: dimension mismatch");
  }
  Eigen::VectorXd s(grad.size());
  for (Eigen::Index k = 0; k < grad.size(); ++k) {
    s[k] = grad[k] < 0.0 ? upper[k] : lower[k];
  }
  return s;
}

Eigen::VectorXd frank_wolfe_step(const Eigen::VectorXd& grad,
                                 const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper, int itr, int m) {
  if (m < 2) {
    throw ConfigError("frank_wolfe_step: m must be >= 2");
  }
  if (itr < 0) {
    throw std::invalid_argument("frank_wolfe_step: negative iteration index");
  }
  Eigen::VectorXd th = theta;
  if ((th.array() < lower.array()).any() || (th.array() > upper.array()).any()) {
    std::cerr << "frank_wolfe_step: theta outside the box, projecting\n";
    th = th.cwiseMax(lower).cwiseMin(upper);
  }
  const Eigen::VectorXd s = fw_direction(grad, lower, upper);
  const double alpha = 2.0 / static_cast<double>(m + itr);
  Eigen::VectorXd next = th + alpha * (s - th);
  // Exact feasibility is the contract; the clamp only strips round-off dust
  // from the convex combination.
  return next.cwiseMax(lower).cwiseMin(upper);
}

double training_objective(const TrainProblem& prob, const NoiseParams& theta,
                          const SolverOptions& opts) {
  if (prob.size() == 0) {
    throw std::invalid_argument("training_objective: empty problem");
  }
  double loss = 0.0;
  for (int j = 0; j < prob.size(); ++j) {
    const SolveResult r =
        solve(prob.graphs[static_cast<size_t>(j)],
              prob.gt[static_cast<size_t>(j)], theta, opts);
    loss += tracking_loss(r.estimate, prob.gt[static_cast<size_t>(j)]);
  }
  return loss / static_cast<double>(prob.size());
}

TrainReport train(const TrainProblem& prob, const NoiseParams& theta0,
                  const TrainConfig& cfg) {
  cfg.validate();
  theta0.validate();
  if (prob.size() == 0) {
    throw std::invalid_argument("train: empty problem");
  }
  if (!cfg.bounds.contains(theta0)) {
    throw ConfigError("train: theta0 violates the bounds");
  }

  const std::vector<std::string> classes = theta0.classes();
  const Eigen::VectorXd lower = cfg.bounds.flatten_lower(classes);
  const Eigen::VectorXd upper = cfg.bounds.flatten_upper(classes);
  const int n = prob.size();
  const int threads =
      cfg.parallel_perturbations ? resolve_threads(cfg.threads) : 1;

  TrainReport report;
  report.method = "ours";
  report.classes = classes;

  Eigen::VectorXd theta = theta0.flatten();
  Eigen::VectorXd best_theta = theta;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_iteration = 0;
  std::vector<double> prefix_best;

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  for (int k = 0; k < cfg.max_outer_iterations; ++k) {
    const NoiseParams theta_k = NoiseParams::unflatten(classes, theta);

    std::vector<SolveResult> bases(static_cast<size_t>(n));
    parallel_for(n, threads, [&](int j) {
      bases[static_cast<size_t>(j)] =
          solve(prob.graphs[static_cast<size_t>(j)],
                prob.gt[static_cast<size_t>(j)], theta_k, cfg.solver);
    });
    const bool bases_ok =
        std::all_of(bases.begin(), bases.end(),
                    [](const SolveResult& r) { return r.converged; });
    if (!bases_ok) {
      report.aborted = true;
      break;
    }

    double loss = 0.0;
    double transl = 0.0;
    double rot = 0.0;
    for (int j = 0; j < n; ++j) {
      const auto& est = bases[static_cast<size_t>(j)].estimate;
      const auto& gt = prob.gt[static_cast<size_t>(j)];
      loss += tracking_loss(est, gt);
      const Rmse m = rmse(est, gt);
      transl += m.transl;
      rot += m.rot;
    }
    loss /= n;
    transl /= n;
    rot /= n;

    TrainIterationRecord rec;
    rec.iteration = k;
    rec.loss = loss;
    rec.wall_seconds = elapsed();
    rec.transl_rmse = transl;
    rec.rot_rmse = rot;
    rec.spread = theta.maxCoeff() / theta.minCoeff();
    rec.theta = theta;
    report.iterations.push_back(rec);

    if (loss < best_loss) {
      best_loss = loss;
      best_theta = theta;
      best_iteration = k;
    }
    prefix_best.push_back(best_loss);

    const int w = cfg.convergence_window;
    if (k >= w &&
        prefix_best[static_cast<size_t>(k - w)] - best_loss <
            cfg.convergence_loss_tolerance) {
      break;
    }
    if (k == cfg.max_outer_iterations - 1) {
      break;
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    bool grad_ok = false;
    double tau = cfg.tau_rel;
    for (int attempt = 0; attempt < 4 && !grad_ok; ++attempt) {
      grad.setZero();
      bool all_ok = true;
      for (int j = 0; j < n && all_ok; ++j) {
        const JacobianResult jr = solution_jacobian(
            prob.graphs[static_cast<size_t>(j)], theta_k, classes,
            bases[static_cast<size_t>(j)], tau, lower, cfg.solver, threads);
        if (!jr.ok) {
          all_ok = false;
          break;
        }
        grad += loss_gradient(jr.s, bases[static_cast<size_t>(j)].estimate,
                              prob.gt[static_cast<size_t>(j)]);
      }
      if (all_ok) {
        grad /= static_cast<double>(n);
        grad_ok = true;
      } else {
        tau *= 0.5;
      }
    }
    if (!grad_ok) {
      report.aborted = true;
      break;
    }

    theta = frank_wolfe_step(grad, theta, lower, upper, k, cfg.fw_m);
  }

  report.theta_star = NoiseParams::unflatten(classes, best_theta);
  report.best_loss = best_loss;
  report.best_iteration = best_iteration;
  report.final_spread = eigen_spread(report.theta_star);
  return report;
}

}  // namespace covlearn
