#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "covlearn/factor_graph.hpp"
#include "covlearn/rng.hpp"
#include "covlearn/se2.hpp"

using namespace covlearn;

namespace {

NoiseParams two_class_params(const Eigen::Vector3d& gps,
                             const Eigen::Vector3d& odom) {
  NoiseParams p;
  p.entries["gps"] = gps;
  p.entries["odom"] = odom;
  return p;
}

/// Small random chain graph with known structure for property tests.
struct RandomProblem {
  FactorGraph graph;
  Trajectory states;
  NoiseParams theta;
};

RandomProblem make_random_problem(std::uint64_t seed, int num_poses) {
  RngStream rng(seed, 0);
  RandomProblem out;
  out.graph.num_poses = num_poses;
  out.states.reserve(static_cast<size_t>(num_poses));
  for (int t = 0; t < num_poses; ++t) {
    out.states.emplace_back(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                            rng.uniform(-1.5, 1.5));
    SE2Pose z(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
              rng.uniform(-1.5, 1.5));
    out.graph.factors.push_back(Factor::gps(t, z));
    if (t > 0) {
      SE2Pose zr(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                 rng.uniform(-0.8, 0.8));
      out.graph.factors.push_back(Factor::odom(t - 1, t, zr));
    }
  }
  out.theta = two_class_params(
      Eigen::Vector3d(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                      rng.uniform(0.1, 2.0)),
      Eigen::Vector3d(rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0),
                      rng.uniform(0.1, 2.0)));
  return out;
}

}  // namespace

TEST_CASE("whitening divides by the standard deviation") {
  Eigen::Vector3d r(1.0, 1.0, 1.0);
  Eigen::Vector3d theta(0.25, 1.0, 4.0);
  Eigen::Vector3d w = whiten(r, theta);
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(whitening_weights(Eigen::Vector3d(1.0, 0.0, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(whitening_weights(Eigen::Vector3d(1.0, -0.5, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("gps residual is the tangent offset from the measurement") {
  Trajectory states = {SE2Pose(0.7, -0.3, 0.4)};
  Factor f = Factor::gps(0, states[0]);
  CHECK(residual(f, states).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::Vector3d tau(0.05, -0.02, 0.03);
  Trajectory moved = {oplus(tau, states[0])};
  Eigen::Vector3d r = residual(f, moved);
  CHECK((r - tau).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("odometry residual compares the relative pose to the measurement") {
  Trajectory states = {SE2Pose(), SE2Pose(1.0, 0.0, 0.0)};
  Factor exact = Factor::odom(0, 1, SE2Pose(1.0, 0.0, 0.0));
  CHECK(residual(exact, states).cwiseAbs().maxCoeff() < 1e-15);

  Factor shorter = Factor::odom(0, 1, SE2Pose(0.9, 0.0, 0.0));
  Eigen::Vector3d r = residual(shorter, states);
  CHECK(r[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(std::abs(r[1]) < 1e-15);
  CHECK(std::abs(r[2]) < 1e-15);
}

TEST_CASE("total_error sums half squared whitened residuals") {
  Trajectory states = {oplus(Eigen::Vector3d(1.0, 1.0, 1.0), SE2Pose())};
  FactorGraph g;
  g.num_poses = 1;
  g.factors.push_back(Factor::gps(0, SE2Pose()));
  NoiseParams theta;
  theta.entries["gps"] = Eigen::Vector3d(0.25, 1.0, 4.0);
  // r = (1,1,1) exactly, so E = 0.5 * (4 + 1 + 0.25).
  CHECK(total_error(g, states, theta) == doctest::Approx(2.625).epsilon(1e-12));
}

TEST_CASE("linearize produces FD jacobians consistent with the residual") {
  RandomProblem prob = make_random_problem(21, 4);
  SparseSystem sys = linearize(prob.graph, prob.states, prob.theta);
  REQUIRE(sys.rows.size() == prob.graph.factors.size());

  RngStream rng(22, 0);
  for (size_t i = 0; i < prob.graph.factors.size(); ++i) {
    const Factor& f = prob.graph.factors[i];
    const SparseSystem::Row& row = sys.rows[i];
    Eigen::Vector3d w = whitening_weights(prob.theta.at(f.noise_class));
    Eigen::Vector3d r0 = residual(f, prob.states);
    CHECK((row.b + w.cwiseProduct(r0)).cwiseAbs().maxCoeff() < 1e-12);

    // Directional derivative check on the unwhitened residual.
    Eigen::Vector3d d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0));
    const double eps = 1e-7;
    Trajectory bumped = prob.states;
    bumped[static_cast<size_t>(f.var_a)] =
        oplus(eps * d, prob.states[static_cast<size_t>(f.var_a)]);
    Eigen::Vector3d dr_a = (residual(f, bumped) - r0) / eps;
    Eigen::Matrix3d ja_unwhitened = w.cwiseInverse().asDiagonal() * row.ja;
    CHECK((ja_unwhitened * d - dr_a).cwiseAbs().maxCoeff() < 1e-5);

    if (f.kind == FactorKind::OdomBinary) {
      bumped = prob.states;
      bumped[static_cast<size_t>(f.var_b)] =
          oplus(eps * d, prob.states[static_cast<size_t>(f.var_b)]);
      Eigen::Vector3d dr_b = (residual(f, bumped) - r0) / eps;
      Eigen::Matrix3d jb_unwhitened = w.cwiseInverse().asDiagonal() * row.jb;
      CHECK((jb_unwhitened * d - dr_b).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("gps jacobian at zero residual is the identity") {
  Trajectory states = {SE2Pose(0.3, 0.8, -0.6)};
  FactorGraph g;
  g.num_poses = 1;
  g.factors.push_back(Factor::gps(0, states[0]));
  NoiseParams theta;
  theta.entries["gps"] = Eigen::Vector3d::Ones();
  SparseSystem sys = linearize(g, states, theta);
  CHECK((sys.rows[0].ja - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("dense views match the block accumulation") {
  RandomProblem prob = make_random_problem(23, 5);
  SparseSystem sys = linearize(prob.graph, prob.states, prob.theta);
  Eigen::MatrixXd a = sys.dense_a();
  Eigen::VectorXd b = sys.dense_b();
  REQUIRE(a.rows() == sys.row_count());
  REQUIRE(a.cols() == sys.cols());
  CHECK((sys.normal_matrix() - a.transpose() * a).cwiseAbs().maxCoeff() <
        1e-11);
  CHECK((sys.normal_rhs() - a.transpose() * b).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("condition diagnostics on hand-built systems") {
  SparseSystem sys;
  sys.num_poses = 1;
  SparseSystem::Row row;
  row.var_a = 0;
  row.ja = Eigen::Matrix3d::Identity();
  sys.rows.push_back(row);
  CHECK(condition_diagnostics(sys).kappa_a == doctest::Approx(1.0).epsilon(1e-12));

  sys.rows[0].ja = Eigen::Vector3d(10.0, 5.0, 1.0).asDiagonal();
  CHECK(condition_diagnostics(sys).kappa_a ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("noise spread drives the condition number") {
  // One pose anchored at its own measurement: A = diag(theta)^(-1/2) exactly,
  // so kappa = sqrt(max/min).
  Trajectory states = {SE2Pose(0.2, -0.1, 0.3)};
  FactorGraph g;
  g.num_poses = 1;
  g.factors.push_back(Factor::gps(0, states[0]));

  NoiseParams spread100;
  spread100.entries["gps"] = Eigen::Vector3d(0.01, 1.0, 1.0);
  NoiseParams spread1;
  spread1.entries["gps"] = Eigen::Vector3d(1.0, 1.0, 1.0);

  double kappa_spread = condition_diagnostics(linearize(g, states, spread100)).kappa_a;
  double kappa_flat = condition_diagnostics(linearize(g, states, spread1)).kappa_a;
  CHECK(kappa_spread == doctest::Approx(10.0).epsilon(1e-6));
  CHECK(kappa_flat == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(kappa_spread / kappa_flat == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("condition diagnostics refuses oversized systems") {
  SparseSystem sys;
  sys.num_poses = 700;
  CHECK_THROWS_AS(condition_diagnostics(sys), std::invalid_argument);
}

TEST_CASE("graph validation catches structural errors") {
  FactorGraph g;
  g.num_poses = 2;
  g.factors.push_back(Factor::gps(0, SE2Pose()));
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);

  g.factors.push_back(Factor::gps(5, SE2Pose()));
  CHECK_THROWS_AS(g.validate(), std::out_of_range);

  FactorGraph gap;
  gap.num_poses = 3;
  gap.factors.push_back(Factor::gps(0, SE2Pose()));
  gap.factors.push_back(Factor::odom(0, 2, SE2Pose()));
  CHECK_THROWS_AS(gap.validate(), std::invalid_argument);
}

TEST_CASE("unknown noise class is rejected") {
  Trajectory states = {SE2Pose()};
  FactorGraph g;
  g.num_poses = 1;
  g.factors.push_back(Factor::gps(0, SE2Pose(), "radar"));
  NoiseParams theta;
  theta.entries["gps"] = Eigen::Vector3d::Ones();
  CHECK_THROWS(linearize(g, states, theta));
  CHECK_THROWS(total_error(g, states, theta));
}
