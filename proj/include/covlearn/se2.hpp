#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace covlearn {

/// Tangent-space increment (dx, dy, dtheta) of se(2).
using Tangent3 = Eigen::Vector3d;

/// Wraps an angle to the principal interval (-pi, pi].
inline double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta + std::numbers::pi, two_pi);
  if (t <= 0.0) {
    t += two_pi;
  }
  return t - std::numbers::pi;
}

/// A planar rigid transform. The heading is stored wrapped to (-pi, pi]
/// on every construction so that tangent-space differences stay bounded.
struct SE2Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  SE2Pose() = default;
  SE2Pose(double x_in, double y_in, double theta_in)
      : x(x_in), y(y_in), theta(wrap_angle(theta_in)) {}

  static SE2Pose identity() { return SE2Pose{}; }
};

using Trajectory = std::vector<SE2Pose>;

namespace detail {

// Coefficients of the SE(2) V-matrix: a = sin(w)/w, b = (1-cos(w))/w,
// with a series fallback below the small-angle threshold to avoid
// cancellation near w = 0.
constexpr double kSmallAngle = 1e-8;

inline void v_coefficients(double w, double& a, double& b) {
  if (std::abs(w) < kSmallAngle) {
    const double w2 = w * w;
    a = 1.0 - w2 / 6.0;
    b = 0.5 * w - w * w2 / 24.0;
  } else {
    a = std::sin(w) / w;
    b = (1.0 - std::cos(w)) / w;
  }
}

}  // namespace detail

/// Exponential map se(2) -> SE(2), closed form (V-matrix).
inline SE2Pose exp(const Tangent3& tau) {
  double a = 0.0;
  double b = 0.0;
  detail::v_coefficients(tau.z(), a, b);
  return SE2Pose(a * tau.x() - b * tau.y(), b * tau.x() + a * tau.y(), tau.z());
}

/// Logarithm map SE(2) -> se(2) on the principal branch. A stored heading of
/// exactly pi (the branch boundary) maps to the +pi branch.
inline Tangent3 log(const SE2Pose& p) {
  double a = 0.0;
  double b = 0.0;
  detail::v_coefficients(p.theta, a, b);
  const double d = a * a + b * b;
  return Tangent3((a * p.x + b * p.y) / d, (-b * p.x + a * p.y) / d, p.theta);
}

/// Group product a . b.
inline SE2Pose compose(const SE2Pose& a, const SE2Pose& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return SE2Pose(a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
                 a.theta + b.theta);
}

/// Group inverse.
inline SE2Pose inverse(const SE2Pose& p) {
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  return SE2Pose(-(c * p.x + s * p.y), -(-s * p.x + c * p.y), -p.theta);
}

/// Left-plus: tau (+) p = Exp(tau) . p.
inline SE2Pose oplus(const Tangent3& tau, const SE2Pose& p) {
  return compose(exp(tau), p);
}

/// Left-minus: a (-) b = Log(a . b^{-1}), so that (a (-) b) (+) b = a.
inline Tangent3 ominus(const SE2Pose& a, const SE2Pose& b) {
  return log(compose(a, inverse(b)));
}

/// Stacks pose-wise tangent differences a_t (-) b_t into a 3T vector,
/// pose-major (pose 0 first).
inline Eigen::VectorXd trajectory_delta(const Trajectory& a,
                                        const Trajectory& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("trajectory_delta: length mismatch");
  }
  Eigen::VectorXd out(3 * static_cast<Eigen::Index>(a.size()));
  for (std::size_t t = 0; t < a.size(); ++t) {
    out.segment<3>(3 * static_cast<Eigen::Index>(t)) = ominus(a[t], b[t]);
  }
  return out;
}

}  // namespace covlearn
