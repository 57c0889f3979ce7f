#include "covlearn/factor_graph.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

namespace covlearn {

namespace {

constexpr double kJacobianStep = 1e-6;

Tangent3 residual_at(const Factor& f, const SE2Pose& xa, const SE2Pose& xb) {
  if (f.kind == FactorKind::GpsUnary) {
    return ominus(xa, f.z);
  }
  return ominus(compose(inverse(xa), xb), f.z);
}

/// Central-difference Jacobian of the residual w.r.t. one variable's local
/// tangent perturbation.
Eigen::Matrix3d residual_jacobian(const Factor& f, const SE2Pose& xa,
                                  const SE2Pose& xb, bool wrt_b) {
  Eigen::Matrix3d j;
  for (int k = 0; k < 3; ++k) {
    Tangent3 tau = Tangent3::Zero();
    tau[k] = kJacobianStep;
    const SE2Pose plus = oplus(tau, wrt_b ? xb : xa);
    tau[k] = -kJacobianStep;
    const SE2Pose minus = oplus(tau, wrt_b ? xb : xa);
    const Tangent3 rp =
        wrt_b ? residual_at(f, xa, plus) : residual_at(f, plus, xb);
    const Tangent3 rm =
        wrt_b ? residual_at(f, xa, minus) : residual_at(f, minus, xb);
    j.col(k) = (rp - rm) / (2.0 * kJacobianStep);
  }
  return j;
}

}  // namespace

Tangent3 residual(const Factor& f, const Trajectory& states) {
  const int n = static_cast<int>(states.size());
  if (f.var_a < 0 || f.var_a >= n) {
    throw std::out_of_range("residual: variable index out of range");
  }
  const SE2Pose& xa = states[static_cast<size_t>(f.var_a)];
  if (f.kind == FactorKind::GpsUnary) {
    return residual_at(f, xa, xa);
  }
  if (f.var_b < 0 || f.var_b >= n) {
    throw std::out_of_range("residual: variable index out of range");
  }
  return residual_at(f, xa, states[static_cast<size_t>(f.var_b)]);
}

Eigen::Vector3d whitening_weights(const Eigen::Vector3d& theta_i) {
  if (!(theta_i.array() > 0.0).all()) {
    throw std::invalid_argument("whitening_weights: nonpositive theta entry");
  }
  return theta_i.cwiseSqrt().cwiseInverse();
}

Eigen::Vector3d whiten(const Eigen::Vector3d& r, const Eigen::Vector3d& theta_i) {
  return whitening_weights(theta_i).cwiseProduct(r);
}

Eigen::Matrix3d whiten(const Eigen::Matrix3d& j, const Eigen::Vector3d& theta_i) {
  return whitening_weights(theta_i).asDiagonal() * j;
}

SparseSystem linearize(const FactorGraph& g, const Trajectory& x,
                       const NoiseParams& theta) {
  if (static_cast<int>(x.size()) != g.num_poses) {
    throw std::invalid_argument("linearize: state count mismatch");
  }
  SparseSystem sys;
  sys.num_poses = g.num_poses;
  sys.rows.reserve(g.factors.size());
  for (const auto& f : g.factors) {
    const Eigen::Vector3d w = whitening_weights(theta.at(f.noise_class));
    SparseSystem::Row row;
    row.var_a = f.var_a;
    row.var_b = f.kind == FactorKind::OdomBinary ? f.var_b : -1;
    const Tangent3 r = residual(f, x);
    const SE2Pose& xa = x[static_cast<size_t>(f.var_a)];
    const SE2Pose& xb =
        row.var_b >= 0 ? x[static_cast<size_t>(f.var_b)] : xa;
    row.ja = w.asDiagonal() * residual_jacobian(f, xa, xb, false);
    if (row.var_b >= 0) {
      row.jb = w.asDiagonal() * residual_jacobian(f, xa, xb, true);
    }
    row.b = -w.cwiseProduct(r);
    sys.rows.push_back(row);
  }
  return sys;
}

double total_error(const FactorGraph& g, const Trajectory& x,
                   const NoiseParams& theta) {
  double e = 0.0;
  for (const auto& f : g.factors) {
    const Eigen::Vector3d& th = theta.at(f.noise_class);
    if (!(th.array() > 0.0).all()) {
      throw std::invalid_argument("total_error: nonpositive theta entry");
    }
    const Tangent3 r = residual(f, x);
    e += 0.5 * (r.array().square() / th.array()).sum();
  }
  return e;
}

Eigen::MatrixXd SparseSystem::dense_a() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(row_count(), cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    a.block<3, 3>(3 * static_cast<Eigen::Index>(i), 3 * row.var_a) = row.ja;
    if (row.var_b >= 0) {
      a.block<3, 3>(3 * static_cast<Eigen::Index>(i), 3 * row.var_b) = row.jb;
    }
  }
  return a;
}

Eigen::VectorXd SparseSystem::dense_b() const {
  Eigen::VectorXd b(row_count());
  for (size_t i = 0; i < rows.size(); ++i) {
    b.segment<3>(3 * static_cast<Eigen::Index>(i)) = rows[i].b;
  }
  return b;
}

Eigen::MatrixXd SparseSystem::normal_matrix() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(cols(), cols());
  for (const Row& row : rows) {
    h.block<3, 3>(3 * row.var_a, 3 * row.var_a) +=
        row.ja.transpose() * row.ja;
    if (row.var_b >= 0) {
      h.block<3, 3>(3 * row.var_b, 3 * row.var_b) +=
          row.jb.transpose() * row.jb;
      const Eigen::Matrix3d cross = row.ja.transpose() * row.jb;
      h.block<3, 3>(3 * row.var_a, 3 * row.var_b) += cross;
      h.block<3, 3>(3 * row.var_b, 3 * row.var_a) += cross.transpose();
    }
  }
  return h;
}

Eigen::VectorXd SparseSystem::normal_rhs() const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(cols());
  for (const Row& row : rows) {
    g.segment<3>(3 * row.var_a) += row.ja.transpose() * row.b;
    if (row.var_b >= 0) {
      g.segment<3>(3 * row.var_b) += row.jb.transpose() * row.b;
    }
  }
  return g;
}

ConditionDiagnostics condition_diagnostics(const SparseSystem& sys) {
  if (sys.cols() > 2000) {
    throw std::invalid_argument(
        "condition_diagnostics: system exceeds the 2000-column limit");
  }
  if (sys.rows.empty()) {
    throw std::invalid_argument("condition_diagnostics: empty system");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.dense_a());
  const Eigen::VectorXd& sv = svd.singularValues();
  ConditionDiagnostics d;
  const double smin = sv[sv.size() - 1];
  d.kappa_a = smin > 0.0 ? sv[0] / smin
                         : std::numeric_limits<double>::infinity();
  return d;
}

}  // namespace covlearn
