#include "covlearn/solver.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "covlearn/errors.hpp"

namespace covlearn {

namespace {

/// Below this gradient norm the system is at numerical stationarity and
/// further steps only churn floating-point noise.
constexpr double kGradientFloor = 1e-13;

bool damped_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                  double damping, Eigen::VectorXd& delta) {
  Eigen::MatrixXd hd = h;
  hd.diagonal().array() += damping;

  // Jacobi scaling: whitening by very different noise scales leaves the
  // normal matrix badly conditioned, which caps how precisely the step can
  // land. Solving the symmetrically scaled system recovers that precision
  // and is algebraically the same damped normal equations.
  Eigen::VectorXd d = hd.diagonal().cwiseSqrt();
  if (!(d.array() > 0.0).all()) {
    return false;
  }
  const Eigen::VectorXd dinv = d.cwiseInverse();
  const Eigen::MatrixXd scaled =
      dinv.asDiagonal() * hd * dinv.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) {
    return false;
  }
  delta = dinv.asDiagonal() * llt.solve(dinv.asDiagonal() * g);
  return delta.allFinite();
}

Trajectory retract(const Trajectory& x, const Eigen::VectorXd& delta) {
  Trajectory out;
  out.reserve(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    out.push_back(
        oplus(delta.segment<3>(3 * static_cast<Eigen::Index>(t)), x[t]));
  }
  return out;
}

}  // namespace

void SolverOptions::validate() const {
  const bool ok = max_iterations > 0 && initial_damping > 0.0 &&
                  damping_increase > 1.0 && damping_decrease > 0.0 &&
                  damping_decrease < 1.0 && min_damping > 0.0 &&
                  max_damping > min_damping && error_decrease_tolerance > 0.0 &&
                  step_norm_tolerance > 0.0 && gradient_tolerance > 0.0;
  if (!ok) {
    throw ConfigError("SolverOptions: all fields must be positive and the "
                      "damping factors must bracket 1");
  }
}

Eigen::VectorXd gauss_newton_step(const SparseSystem& sys, double damping) {
  if (damping < 0.0) {
    throw std::invalid_argument("gauss_newton_step: negative damping");
  }
  Eigen::VectorXd delta;
  if (!damped_solve(sys.normal_matrix(), sys.normal_rhs(), damping, delta)) {
    throw std::runtime_error("gauss_newton_step: Cholesky factorization failed");
  }
  return delta;
}

SolveResult solve(const FactorGraph& g, const Trajectory& x0,
                  const NoiseParams& theta, const SolverOptions& opts) {
  opts.validate();
  if (static_cast<int>(x0.size()) != g.num_poses) {
    throw std::invalid_argument("solve: initialization length mismatch");
  }

  Trajectory x = x0;
  double error = total_error(g, x, theta);
  double damping = opts.initial_damping;
  int accepted = 0;
  bool stop = false;

  for (int it = 0; it < opts.max_iterations && !stop; ++it) {
    const SparseSystem sys = linearize(g, x, theta);
    const Eigen::MatrixXd h = sys.normal_matrix();
    const Eigen::VectorXd atb = sys.normal_rhs();
    if (atb.lpNorm<Eigen::Infinity>() < kGradientFloor) {
      break;
    }

    bool took_step = false;
    while (true) {
      Eigen::VectorXd delta;
      if (!damped_solve(h, atb, damping, delta)) {
        damping *= opts.damping_increase;
        if (damping > opts.max_damping) {
          break;
        }
        continue;
      }
      const Trajectory candidate = retract(x, delta);
      const double candidate_error = total_error(g, candidate, theta);
      if (candidate_error < error) {
        const double improvement = error - candidate_error;
        const double step_norm = delta.lpNorm<Eigen::Infinity>();
        x = candidate;
        error = candidate_error;
        ++accepted;
        damping = std::max(damping * opts.damping_decrease, opts.min_damping);
        took_step = true;
        if (improvement < opts.error_decrease_tolerance &&
            step_norm < opts.step_norm_tolerance) {
          stop = true;
        }
        break;
      }
      damping *= opts.damping_increase;
      if (damping > opts.max_damping) {
        break;
      }
    }
    if (!took_step) {
      break;
    }
  }

  SolveResult result;
  result.estimate = std::move(x);
  result.final_error = error;
  result.iterations = accepted;
  result.final_gradient_norm =
      linearize(g, result.estimate, theta).normal_rhs().lpNorm<Eigen::Infinity>();
  result.converged = result.final_gradient_norm < opts.gradient_tolerance;
  return result;
}

}  // namespace covlearn
