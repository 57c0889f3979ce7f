#include <cmath>
#include <numbers>
#include <stdexcept>

#include <doctest.h>

#include "covlearn/rng.hpp"
#include "covlearn/se2.hpp"

using namespace covlearn;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Vector3d random_tangent(RngStream& rng) {
  return Eigen::Vector3d(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                         rng.uniform(-3.1, 3.1));
}

SE2Pose random_pose(RngStream& rng) {
  return SE2Pose(rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                 rng.uniform(-kPi, kPi));
}

void check_pose_near(const SE2Pose& a, const SE2Pose& b, double tol) {
  CHECK(std::abs(a.x - b.x) < tol);
  CHECK(std::abs(a.y - b.y) < tol);
  CHECK(std::abs(wrap_angle(a.theta - b.theta)) < tol);
}

}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-12));
  CHECK(wrap_angle(2.0 * kPi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(wrap_angle(kPi + 0.1) == doctest::Approx(-kPi + 0.1).epsilon(1e-12));
  CHECK(wrap_angle(-kPi - 0.1) == doctest::Approx(kPi - 0.1).epsilon(1e-12));
}

TEST_CASE("exp matches ODE-integrated reference values") {
  // Frozen from tools/oracles/se2_exp_reference.py (RK4 on the matrix ODE).
  SE2Pose quarter = exp(Eigen::Vector3d(1.0, 0.0, kPi / 2.0));
  CHECK(quarter.x == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(quarter.y == doctest::Approx(2.0 / kPi).epsilon(1e-12));
  CHECK(quarter.theta == doctest::Approx(kPi / 2.0).epsilon(1e-15));

  SE2Pose a = exp(Eigen::Vector3d(0.3, -0.2, 0.5));
  CHECK(a.x == doctest::Approx(0.33662229840637165).epsilon(1e-10));
  CHECK(a.y == doctest::Approx(-0.118319752575906).epsilon(1e-10));
  CHECK(a.theta == doctest::Approx(0.5).epsilon(1e-12));

  SE2Pose b = exp(Eigen::Vector3d(-1.1, 0.7, -2.4));
  CHECK(b.x == doctest::Approx(0.19715254261360085).epsilon(1e-10));
  CHECK(b.y == doctest::Approx(0.99331554728381677).epsilon(1e-10));
  CHECK(b.theta == doctest::Approx(-2.4).epsilon(1e-12));

  SE2Pose rot = exp(Eigen::Vector3d(0.0, 0.0, 1.0));
  CHECK(rot.x == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rot.y == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rot.theta == doctest::Approx(1.0).epsilon(1e-14));

  SE2Pose transl = exp(Eigen::Vector3d(0.25, -0.75, 0.0));
  CHECK(transl.x == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(transl.y == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(transl.theta == 0.0);
}

TEST_CASE("exp small-angle branch matches first-order expansion") {
  const double vx = 0.4;
  const double vy = -0.9;
  for (double w : {1e-12, 1e-9, 5e-9, 2e-8, 1e-7}) {
    SE2Pose p = exp(Eigen::Vector3d(vx, vy, w));
    CHECK(std::abs(p.x - (vx - 0.5 * w * vy)) < 1e-8);
    CHECK(std::abs(p.y - (vy + 0.5 * w * vx)) < 1e-8);
    CHECK(p.theta == doctest::Approx(w).epsilon(1e-15));
  }
}

TEST_CASE("log inverts exp over random tangents") {
  RngStream rng(11, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector3d tau = random_tangent(rng);
    Eigen::Vector3d back = covlearn::log(exp(tau));
    worst = std::max(worst, (back - tau).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("exp inverts log over random poses") {
  RngStream rng(12, 0);
  for (int i = 0; i < 1000; ++i) {
    SE2Pose p = random_pose(rng);
    check_pose_near(exp(covlearn::log(p)), p, 1e-10);
  }
}

TEST_CASE("inverse example and group identities") {
  SE2Pose inv = inverse(SE2Pose(0.0, 1.0, kPi / 2.0));
  CHECK(inv.x == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(inv.y == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inv.theta == doctest::Approx(-kPi / 2.0).epsilon(1e-15));

  RngStream rng(13, 0);
  for (int i = 0; i < 1000; ++i) {
    SE2Pose a = random_pose(rng);
    SE2Pose b = random_pose(rng);
    SE2Pose c = random_pose(rng);
    check_pose_near(compose(a, inverse(a)), SE2Pose(), 1e-10);
    check_pose_near(compose(inverse(a), a), SE2Pose(), 1e-10);
    check_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)),
                    1e-10);
    check_pose_near(compose(a, SE2Pose()), a, 1e-12);
    check_pose_near(compose(SE2Pose(), a), a, 1e-12);
  }
}

TEST_CASE("oplus and ominus are consistent") {
  RngStream rng(14, 0);
  for (int i = 0; i < 1000; ++i) {
    SE2Pose a = random_pose(rng);
    SE2Pose b = random_pose(rng);
    check_pose_near(oplus(ominus(a, b), b), a, 1e-9);

    Eigen::Vector3d tau(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                        rng.uniform(-3.1, 3.1));
    Eigen::Vector3d back = ominus(oplus(tau, b), b);
    CHECK((back - tau).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("ominus of identical poses is zero") {
  SE2Pose p(3.0, -2.0, 1.2);
  CHECK(ominus(p, p).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("trajectory_delta stacks pose-major tangents") {
  Trajectory est = {SE2Pose(1.0, 0.0, 0.0), SE2Pose(0.0, 2.0, 0.0)};
  Trajectory gt = {SE2Pose(), SE2Pose()};
  Eigen::VectorXd d = trajectory_delta(est, gt);
  REQUIRE(d.size() == 6);
  CHECK(d[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d[1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d[3] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d[4] == doctest::Approx(2.0).epsilon(1e-15));

  Trajectory shorter = {SE2Pose()};
  CHECK_THROWS_AS(trajectory_delta(est, shorter), std::invalid_argument);
}
