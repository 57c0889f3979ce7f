"""End-to-end smoke tests for the python bindings."""

import math
import unittest

import covlearn as cl


class Se2Test(unittest.TestCase):
    def test_exp_log_roundtrip(self):
        tau = (0.3, -0.2, 0.5)
        pose = cl.exp(tau)
        back = cl.log(pose)
        for got, want in zip(back, tau):
            self.assertAlmostEqual(got, want, places=12)

    def test_compose_inverse(self):
        a = cl.SE2Pose(1.0, 2.0, 0.7)
        ident = cl.compose(a, cl.inverse(a))
        self.assertAlmostEqual(ident.x, 0.0, places=12)
        self.assertAlmostEqual(ident.y, 0.0, places=12)
        self.assertAlmostEqual(ident.theta, 0.0, places=12)

    def test_ominus_oplus(self):
        a = cl.SE2Pose(1.0, -0.5, 0.3)
        b = cl.SE2Pose(0.2, 0.9, -1.1)
        tau = cl.ominus(a, b)
        again = cl.oplus(tau, b)
        self.assertAlmostEqual(again.x, a.x, places=10)
        self.assertAlmostEqual(again.y, a.y, places=10)
        self.assertAlmostEqual(again.theta, a.theta, places=10)


class PipelineTest(unittest.TestCase):
    def test_dataset_shapes(self):
        spec = cl.standard_spec("D1", seed=7, length=40, train_count=2, test_count=3)
        ds = cl.make_dataset(spec)
        self.assertEqual(len(ds.train), 2)
        self.assertEqual(len(ds.test), 3)
        self.assertEqual(len(ds.train[0].gt), 40)
        self.assertEqual(len(ds.train[0].odom), 39)

    def test_solve_converges(self):
        spec = cl.standard_spec("D1", seed=3, length=40, train_count=1, test_count=1)
        ds = cl.make_dataset(spec)
        traj = ds.train[0]
        graph = cl.build_graph(traj)
        x0 = cl.dead_reckoning_init(traj)
        result = cl.solve(graph, x0, spec.latent)
        self.assertTrue(result.converged)
        self.assertTrue(math.isfinite(result.final_error))
        self.assertLess(result.final_gradient_norm, 1e-6)

    def test_train_and_evaluate(self):
        spec = cl.standard_spec("D1", seed=5, length=30, train_count=2, test_count=2)
        ds = cl.make_dataset(spec)
        prob = cl.make_train_problem(ds)

        cfg = cl.TrainConfig()
        cfg.max_outer_iterations = 3
        cfg.bounds = cl.Bounds.uniform(1e-3, 100.0)

        theta0 = {"gps": (0.05, 0.05, 0.01), "odom": (0.5, 0.5, 0.1)}
        report = cl.train(prob, theta0, cfg)

        self.assertFalse(report.aborted)
        self.assertEqual(len(report.iterations), 3)
        self.assertEqual(report.method, "ours")
        for values in report.theta_star.values():
            for v in values:
                self.assertGreaterEqual(v, 1e-3)
                self.assertLessEqual(v, 100.0)

        result = cl.evaluate_dataset(report.theta_star, ds)
        self.assertEqual(len(result.per_trajectory), 2)
        self.assertTrue(math.isfinite(result.mean.transl))
        self.assertTrue(math.isfinite(result.mean.rot))

    def test_frank_wolfe_direction(self):
        s = cl.fw_direction([1.0, -2.0, 0.0], [0.1, 0.1, 0.1], [10.0, 10.0, 10.0])
        self.assertEqual(s, [0.1, 10.0, 0.1])


if __name__ == "__main__":
    unittest.main()
