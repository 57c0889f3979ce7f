#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "covlearn/errors.hpp"
#include "covlearn/learner.hpp"
#include "covlearn/rng.hpp"
#include "covlearn/se2.hpp"
#include "covlearn/solver.hpp"
#include "covlearn/synth_data.hpp"

using namespace covlearn;

namespace {

NoiseParams swapped_d1() {
  NoiseParams p;
  p.entries["gps"] = Eigen::Vector3d(0.05, 0.05, 0.01);
  p.entries["odom"] = Eigen::Vector3d(0.5, 0.5, 0.1);
  return p;
}

Eigen::VectorXd brute_force_vertex(const Eigen::VectorXd& grad,
                                   const Eigen::VectorXd& lower,
                                   const Eigen::VectorXd& upper) {
  const int m = static_cast<int>(grad.size());
  Eigen::VectorXd best;
  double best_val = 0.0;
  for (int mask = 0; mask < (1 << m); ++mask) {
    Eigen::VectorXd v(m);
    for (int k = 0; k < m; ++k) {
      v[k] = (mask >> k) & 1 ? upper[k] : lower[k];
    }
    double val = grad.dot(v);
    if (best.size() == 0 || val < best_val) {
      best = v;
      best_val = val;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("tracking loss on hand-built deltas") {
  Trajectory gt = {SE2Pose(), SE2Pose()};
  CHECK(tracking_loss(gt, gt) == 0.0);

  Trajectory est = {SE2Pose(1.0, 0.0, 0.0), SE2Pose()};
  CHECK(tracking_loss(est, gt) == doctest::Approx(0.5).epsilon(1e-12));

  Trajectory est2 = {SE2Pose(1.0, 0.0, 0.0), SE2Pose(0.0, 2.0, 0.0)};
  CHECK(tracking_loss(est2, gt) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("eigen spread over flattened entries") {
  NoiseParams uniform;
  uniform.entries["gps"] = Eigen::Vector3d(0.3, 0.3, 0.3);
  uniform.entries["odom"] = Eigen::Vector3d(0.3, 0.3, 0.3);
  CHECK(eigen_spread(uniform) == doctest::Approx(1.0).epsilon(1e-15));

  NoiseParams wide;
  wide.entries["gps"] = Eigen::Vector3d(0.1, 1.0, 10.0);
  CHECK(eigen_spread(wide) == doctest::Approx(100.0).epsilon(1e-12));

  NoiseParams mixed;
  mixed.entries["gps"] = Eigen::Vector3d(0.25, 1.0, 4.0);
  mixed.entries["odom"] = Eigen::Vector3d(1.0, 1.0, 1.0);
  CHECK(eigen_spread(mixed) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("solution jacobian matches the weighted-mean oracle") {
  // Frozen from tools/oracles/weighted_mean_reference.py: one pose held by
  // two anchors in separate classes solves per-coordinate inverse-variance
  // means, with analytic sensitivities.
  const Eigen::Vector3d z1(0.004, -0.003, 0.002);
  const Eigen::Vector3d z2(-0.002, 0.005, -0.004);
  FactorGraph g;
  g.num_poses = 1;
  g.factors.push_back(Factor::gps(0, SE2Pose(z1[0], z1[1], z1[2]), "a"));
  g.factors.push_back(Factor::gps(0, SE2Pose(z2[0], z2[1], z2[2]), "b"));

  NoiseParams theta;
  theta.entries["a"] = Eigen::Vector3d(0.2, 0.5, 0.9);
  theta.entries["b"] = Eigen::Vector3d(0.7, 0.3, 0.4);

  SolverOptions opts;
  SolveResult base = solve(g, {SE2Pose()}, theta, opts);
  REQUIRE(base.converged);
  CHECK(base.estimate[0].x ==
        doctest::Approx(0.0026666666666666666).epsilon(1e-4));
  CHECK(base.estimate[0].y ==
        doctest::Approx(0.0019999999999999996).epsilon(1e-4));
  CHECK(base.estimate[0].theta ==
        doctest::Approx(-0.0021538461538461538).epsilon(1e-4));

  std::vector<std::string> classes = theta.classes();
  REQUIRE(classes == std::vector<std::string>{"a", "b"});
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(6, 1e-12);
  JacobianResult jac =
      solution_jacobian(g, theta, classes, base, 1e-4, lower, opts, 1);
  REQUIRE(jac.ok);
  REQUIRE(jac.s.rows() == 3);
  REQUIRE(jac.s.cols() == 6);

  const double expected_a[3] = {-0.0051851851851851859, 0.003749999999999999,
                                -0.0014201183431952662};
  const double expected_b[3] = {0.0014814814814814818, -0.0062499999999999986,
                                0.0031952662721893492};
  for (int k = 0; k < 3; ++k) {
    CHECK(jac.s(k, k) == doctest::Approx(expected_a[k]).epsilon(1e-2));
    CHECK(jac.s(k, 3 + k) == doctest::Approx(expected_b[k]).epsilon(1e-2));
  }

  // Cross-coordinate sensitivities vanish in the decoupled model.
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 6; ++c) {
      if (c % 3 != r) {
        CHECK(std::abs(jac.s(r, c)) < 2e-4);
      }
    }
  }
}

TEST_CASE("loss gradient is zero at a perfect estimate") {
  Eigen::MatrixXd s = Eigen::MatrixXd::Random(6, 4);
  Trajectory gt = {SE2Pose(1.0, 2.0, 0.3), SE2Pose(2.0, 2.5, 0.4)};
  Eigen::VectorXd grad = loss_gradient(s, gt, gt);
  CHECK(grad.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("learner gradient matches a direct finite-difference oracle") {
  // Near-noiseless measurements keep the chart mismatch between the two
  // estimates negligible, while the solve weights stay large enough that the
  // inner solver lands well inside its gradient tolerance on every run.
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 41);
  spec.trajectory_length = 12;
  spec.train_count = 2;
  spec.test_count = 1;
  spec.latent["gps"] = Eigen::Vector3d(2e-8, 2e-8, 1e-8);
  spec.latent["odom"] = Eigen::Vector3d(1e-8, 1e-8, 5e-9);
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  RngStream trng(941, 0);
  auto jitter = [&trng](double nominal) {
    return nominal * std::pow(10.0, trng.uniform(-0.5, 0.5));
  };
  NoiseParams theta;
  theta.entries["gps"] =
      Eigen::Vector3d(jitter(2e-3), jitter(2e-3), jitter(1e-3));
  theta.entries["odom"] =
      Eigen::Vector3d(jitter(1e-3), jitter(1e-3), jitter(5e-4));
  std::vector<std::string> classes = theta.classes();
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(6, 1e-15);

  SolverOptions opts;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(6);
  for (int i = 0; i < prob.size(); ++i) {
    SolveResult base =
        solve(prob.graphs[static_cast<size_t>(i)],
              prob.gt[static_cast<size_t>(i)], theta, opts);
    REQUIRE(base.converged);
    JacobianResult jac =
        solution_jacobian(prob.graphs[static_cast<size_t>(i)], theta, classes,
                          base, 1e-4, lower, opts, 1);
    REQUIRE(jac.ok);
    grad += loss_gradient(jac.s, base.estimate,
                          prob.gt[static_cast<size_t>(i)]);
  }
  grad /= prob.size();

  Eigen::VectorXd flat = theta.flatten();
  double f0 = training_objective(prob, theta, opts);
  Eigen::VectorXd fd(6);
  for (int j = 0; j < 6; ++j) {
    double tau = 1e-4 * std::max(flat[j], lower[j]);
    Eigen::VectorXd bumped = flat;
    bumped[j] += tau;
    double fj = training_objective(
        prob, NoiseParams::unflatten(classes, bumped), opts);
    fd[j] = (fj - f0) / tau;
  }

  // Components carrying real signal must agree relatively; components that
  // are a sliver of the dominant one only admit an absolute comparison.
  double scale = fd.cwiseAbs().maxCoeff();
  REQUIRE(scale > 0.0);
  for (int j = 0; j < 6; ++j) {
    if (std::abs(fd[j]) >= 0.1 * scale) {
      CHECK(grad[j] == doctest::Approx(fd[j]).epsilon(1e-3));
    } else {
      CHECK(std::abs(grad[j] - fd[j]) < 1e-3 * scale);
    }
  }
}

TEST_CASE("frank-wolfe direction matches vertex enumeration") {
  RngStream rng(55, 0);
  for (int m = 1; m <= 6; ++m) {
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd grad(m);
      Eigen::VectorXd lower(m);
      Eigen::VectorXd upper(m);
      for (int k = 0; k < m; ++k) {
        double draw = rng.uniform(-1.0, 1.0);
        grad[k] = std::abs(draw) < 0.1 ? 0.0 : draw;
        lower[k] = rng.uniform(0.001, 0.1);
        upper[k] = lower[k] + rng.uniform(0.1, 10.0);
      }
      Eigen::VectorXd s = fw_direction(grad, lower, upper);
      Eigen::VectorXd brute = brute_force_vertex(grad, lower, upper);
      CHECK(grad.dot(s) <= grad.dot(brute) + 1e-12);
      for (int k = 0; k < m; ++k) {
        CHECK((s[k] == lower[k] || s[k] == upper[k]));
      }
    }
  }
}

TEST_CASE("frank-wolfe step on scalar examples") {
  Eigen::VectorXd grad(1);
  Eigen::VectorXd theta(1);
  Eigen::VectorXd lower(1);
  Eigen::VectorXd upper(1);

  // alpha = 2 / (2 + 0) = 1 jumps to the vertex.
  grad[0] = -1.0;
  theta[0] = 1.0;
  lower[0] = 0.1;
  upper[0] = 10.0;
  Eigen::VectorXd next = frank_wolfe_step(grad, theta, lower, upper, 0, 2);
  CHECK(next[0] == doctest::Approx(10.0).epsilon(1e-15));

  // alpha = 2 / (2 + 2) = 0.5 lands midway between theta and the vertex.
  theta[0] = 0.1;
  upper[0] = 1.0;
  lower[0] = 0.01;
  next = frank_wolfe_step(grad, theta, lower, upper, 2, 2);
  CHECK(next[0] == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("frank-wolfe iterates stay inside the box") {
  RngStream rng(56, 0);
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(6, 0.01);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(6, 5.0);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(6, 1.0);
  for (int itr = 0; itr < 200; ++itr) {
    Eigen::VectorXd grad(6);
    for (int k = 0; k < 6; ++k) {
      grad[k] = rng.uniform(-1.0, 1.0);
    }
    theta = frank_wolfe_step(grad, theta, lower, upper, itr, 10);
    for (int k = 0; k < 6; ++k) {
      CHECK(theta[k] >= lower[k]);
      CHECK(theta[k] <= upper[k]);
    }
  }
}

TEST_CASE("training on near-noise-free data sits at a stationary point") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 3);
  spec.trajectory_length = 20;
  spec.train_count = 2;
  spec.test_count = 1;
  spec.latent["gps"] = Eigen::Vector3d::Constant(1e-24);
  spec.latent["odom"] = Eigen::Vector3d::Constant(1e-24);
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  NoiseParams theta0;
  theta0.entries["gps"] = Eigen::Vector3d::Ones();
  theta0.entries["odom"] = Eigen::Vector3d::Ones();

  TrainConfig cfg;
  cfg.max_outer_iterations = 3;
  cfg.bounds = Bounds::uniform(1e-6, 1e6);
  TrainReport report = train(prob, theta0, cfg);

  CHECK_FALSE(report.aborted);
  REQUIRE(!report.iterations.empty());
  CHECK(report.iterations[0].loss < 1e-12);
  CHECK(report.iterations[0].spread == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(report.best_loss <= report.iterations[0].loss);
}

TEST_CASE("training reports the best iterate and improves swapped init") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 12);
  spec.trajectory_length = 30;
  spec.train_count = 2;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  TrainConfig cfg;
  cfg.max_outer_iterations = 20;
  cfg.bounds = Bounds::uniform(1e-3, 100.0);
  TrainReport report = train(prob, swapped_d1(), cfg);

  CHECK_FALSE(report.aborted);
  REQUIRE(report.iterations.size() >= 2);

  double min_loss = report.iterations[0].loss;
  int min_index = 0;
  for (size_t i = 1; i < report.iterations.size(); ++i) {
    if (report.iterations[i].loss < min_loss) {
      min_loss = report.iterations[i].loss;
      min_index = static_cast<int>(i);
    }
  }
  CHECK(report.best_loss == min_loss);
  CHECK(report.best_iteration == min_index);
  CHECK(report.best_loss < report.iterations[0].loss);

  Eigen::VectorXd star = report.theta_star.flatten();
  Eigen::VectorXd recorded =
      report.iterations[static_cast<size_t>(min_index)].theta;
  CHECK((star - recorded).cwiseAbs().maxCoeff() == 0.0);
  CHECK(report.final_spread == doctest::Approx(eigen_spread(report.theta_star))
                                   .epsilon(1e-12));
}

TEST_CASE("best-iterate selection protects a good starting point") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 1);
  spec.trajectory_length = 40;
  spec.train_count = 2;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  // Starting at the latent parameters, the fixed step schedule still drags
  // the iterates toward box vertices before decaying back, so the per
  // iteration loss is allowed to rise. The reported optimum must not be
  // worse than the start.
  TrainConfig cfg;
  cfg.max_outer_iterations = 10;
  cfg.fw_m = 20;
  cfg.bounds = Bounds::uniform(1e-4, 10.0);
  cfg.convergence_window = 10;
  cfg.solver.gradient_tolerance = 1e-4;
  cfg.solver.max_iterations = 400;
  TrainReport report = train(prob, spec.latent_params(), cfg);

  CHECK_FALSE(report.aborted);
  REQUIRE(!report.iterations.empty());
  double base = report.iterations[0].loss;
  CHECK(report.best_loss <= base);
  double min_seen = std::numeric_limits<double>::infinity();
  for (const auto& rec : report.iterations) {
    min_seen = std::min(min_seen, rec.loss);
  }
  CHECK(report.best_loss == min_seen);
  if (report.best_iteration == 0) {
    Eigen::VectorXd star = report.theta_star.flatten();
    Eigen::VectorXd latent = spec.latent_params().flatten();
    CHECK((star - latent).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("median training loss trends downward") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 12);
  spec.trajectory_length = 30;
  spec.train_count = 2;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  TrainConfig cfg;
  cfg.max_outer_iterations = 15;
  cfg.bounds = Bounds::uniform(1e-3, 100.0);
  cfg.convergence_window = 15;
  TrainReport report = train(prob, swapped_d1(), cfg);
  REQUIRE(report.iterations.size() >= 6);

  auto median_window = [&](size_t end) {
    size_t start = end >= 5 ? end - 5 : 0;
    std::vector<double> vals;
    for (size_t i = start; i < end; ++i) {
      vals.push_back(report.iterations[i].loss);
    }
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
  };

  for (size_t end = 6; end <= report.iterations.size(); ++end) {
    CHECK(median_window(end) <= median_window(end - 1) + 1e-9);
  }
}

TEST_CASE("training is deterministic across thread counts") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 21);
  spec.trajectory_length = 25;
  spec.train_count = 2;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  TrainConfig cfg;
  cfg.max_outer_iterations = 5;
  cfg.bounds = Bounds::uniform(1e-3, 100.0);
  cfg.threads = 1;
  TrainReport a = train(prob, swapped_d1(), cfg);
  cfg.threads = 4;
  TrainReport b = train(prob, swapped_d1(), cfg);

  REQUIRE(a.iterations.size() == b.iterations.size());
  for (size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].loss == b.iterations[i].loss);
    CHECK((a.iterations[i].theta - b.iterations[i].theta)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("convergence window stops a flat run early") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 3);
  spec.trajectory_length = 15;
  spec.train_count = 1;
  spec.test_count = 1;
  spec.latent["gps"] = Eigen::Vector3d::Constant(1e-24);
  spec.latent["odom"] = Eigen::Vector3d::Constant(1e-24);
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  NoiseParams theta0;
  theta0.entries["gps"] = Eigen::Vector3d::Ones();
  theta0.entries["odom"] = Eigen::Vector3d::Ones();

  TrainConfig cfg;
  cfg.max_outer_iterations = 50;
  cfg.convergence_window = 3;
  cfg.bounds = Bounds::uniform(1e-6, 1e6);
  TrainReport report = train(prob, theta0, cfg);

  CHECK_FALSE(report.aborted);
  CHECK(report.iterations.size() <= 6);
  CHECK(report.iterations.size() >= 4);
}

TEST_CASE("training aborts when the inner solver is starved") {
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D2, 9);
  spec.trajectory_length = 25;
  spec.train_count = 1;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);

  TrainConfig cfg;
  cfg.max_outer_iterations = 5;
  cfg.bounds = Bounds::uniform(1e-3, 100.0);
  cfg.solver.max_iterations = 1;

  NoiseParams theta0;
  theta0.entries["gps"] = Eigen::Vector3d(1.0, 1.0, 1.0);
  theta0.entries["odom"] = Eigen::Vector3d(1.0, 1.0, 1.0);
  TrainReport report = train(prob, theta0, cfg);
  CHECK(report.aborted);
  CHECK(report.iterations.empty());
  CHECK((report.theta_star.flatten() - theta0.flatten()).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.fw_m = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig();
  cfg.convergence_window = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig();
  cfg.tau_rel = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig();
  cfg.max_outer_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(TrainConfig().validate());

  // theta0 must start inside the box.
  DatasetSpec spec = DatasetSpec::standard(DatasetId::D1, 2);
  spec.trajectory_length = 10;
  spec.train_count = 1;
  spec.test_count = 1;
  Dataset ds = make_dataset(spec);
  TrainProblem prob = make_train_problem(ds);
  TrainConfig tight;
  tight.bounds = Bounds::uniform(1.0, 2.0);
  NoiseParams outside;
  outside.entries["gps"] = Eigen::Vector3d(0.5, 1.5, 1.5);
  outside.entries["odom"] = Eigen::Vector3d(1.5, 1.5, 1.5);
  CHECK_THROWS_AS(train(prob, outside, tight), ConfigError);
}
