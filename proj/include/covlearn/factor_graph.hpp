#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "covlearn/noise.hpp"
#include "covlearn/se2.hpp"

namespace covlearn {

enum class FactorKind { GpsUnary, OdomBinary };

/// One measurement potential. GpsUnary constrains a single pose against an
/// absolute measurement; OdomBinary constrains two consecutive poses against
/// a relative measurement.
struct Factor {
  FactorKind kind = FactorKind::GpsUnary;
  int var_a = 0;
  int var_b = -1;
  SE2Pose z;
  std::string noise_class = "gps";

  static Factor gps(int t, const SE2Pose& z, std::string cls = "gps") {
    Factor f;
    f.kind = FactorKind::GpsUnary;
    f.var_a = t;
    f.var_b = -1;
    f.z = z;
    f.noise_class = std::move(cls);
    return f;
  }

  static Factor odom(int t_prev, int t_next, const SE2Pose& z_rel,
                     std::string cls = "odom") {
    Factor f;
    f.kind = FactorKind::OdomBinary;
    f.var_a = t_prev;
    f.var_b = t_next;
    f.z = z_rel;
    f.noise_class = std::move(cls);
    return f;
  }
};

/// Immutable after construction; all evaluation routines are read-only.
struct FactorGraph {
  int num_poses = 0;
  std::vector<Factor> factors;

  void validate() const {
    if (num_poses <= 0) {
      throw std::invalid_argument("FactorGraph: num_poses must be positive");
    }
    std::vector<char> touched(static_cast<size_t>(num_poses), 0);
    for (const auto& f : factors) {
      if (f.var_a < 0 || f.var_a >= num_poses) {
        throw std::out_of_range("FactorGraph: factor variable out of range");
      }
      touched[static_cast<size_t>(f.var_a)] = 1;
      if (f.kind == FactorKind::OdomBinary) {
        if (f.var_b != f.var_a + 1 || f.var_b >= num_poses) {
          throw std::invalid_argument(
              "FactorGraph: odometry factor must join consecutive poses");
        }
        touched[static_cast<size_t>(f.var_b)] = 1;
      }
    }
    for (int t = 0; t < num_poses; ++t) {
      if (!touched[static_cast<size_t>(t)]) {
        throw std::invalid_argument("FactorGraph: pose " + std::to_string(t) +
                                    " has no factor");
      }
    }
  }
};

/// Linearized whitened system in block-row form. Each row is one factor's
/// 3-row slice of A together with its right-hand side b = -whitened residual.
/// The block form keeps normal-equation assembly cheap; dense views exist for
/// diagnostics and tests.
struct SparseSystem {
  struct Row {
    int var_a = 0;
    int var_b = -1;
    Eigen::Matrix3d ja = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d jb = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
  };

  int num_poses = 0;
  std::vector<Row> rows;

  Eigen::Index cols() const { return 3 * static_cast<Eigen::Index>(num_poses); }
  Eigen::Index row_count() const {
    return 3 * static_cast<Eigen::Index>(rows.size());
  }

  Eigen::MatrixXd dense_a() const;
  Eigen::VectorXd dense_b() const;

  /// A^T A accumulated block-wise.
  Eigen::MatrixXd normal_matrix() const;

  /// A^T b; the negative objective gradient, so its norm measures
  /// first-order optimality.
  Eigen::VectorXd normal_rhs() const;
};

struct ConditionDiagnostics {
  double kappa_a = 0.0;
};

/// Unwhitened residual of one factor given the current states.
Tangent3 residual(const Factor& f, const Trajectory& states);

/// diag(theta_i)^(-1/2) componentwise scale factors. Throws on nonpositive
/// entries.
Eigen::Vector3d whitening_weights(const Eigen::Vector3d& theta_i);

Eigen::Vector3d whiten(const Eigen::Vector3d& r, const Eigen::Vector3d& theta_i);
Eigen::Matrix3d whiten(const Eigen::Matrix3d& j, const Eigen::Vector3d& theta_i);

/// Builds the whitened linear system. Factor Jacobian blocks come from
/// central finite differences of the residual in each variable's tangent
/// space (step 1e-6); b stacks negated whitened residuals so the minimizer of
/// ||A d - b||^2 is the Gauss-Newton step.
SparseSystem linearize(const FactorGraph& g, const Trajectory& x,
                       const NoiseParams& theta);

/// Sum over factors of 0.5 * r^T diag(theta_i)^(-1) r.
double total_error(const FactorGraph& g, const Trajectory& x,
                   const NoiseParams& theta);

/// 2-norm condition number of the dense-ified A. Guarded to systems of at
/// most 2000 columns.
ConditionDiagnostics condition_diagnostics(const SparseSystem& sys);

}  // namespace covlearn
