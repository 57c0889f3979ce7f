#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "covlearn/baselines.hpp"
#include "covlearn/factor_graph.hpp"
#include "covlearn/learner.hpp"
#include "covlearn/metrics.hpp"
#include "covlearn/noise.hpp"
#include "covlearn/se2.hpp"
#include "covlearn/solver.hpp"
#include "covlearn/synth_data.hpp"

namespace py = pybind11;

namespace {

using Vec3 = std::array<double, 3>;
using ParamDict = std::map<std::string, Vec3>;

Eigen::Vector3d to_eigen(const Vec3& v) {
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

Vec3 from_eigen(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

covlearn::NoiseParams params_from_dict(const ParamDict& d) {
  covlearn::NoiseParams p;
  for (const auto& [cls, v] : d) {
    p.entries[cls] = to_eigen(v);
  }
  return p;
}

ParamDict params_to_dict(const covlearn::NoiseParams& p) {
  ParamDict d;
  for (const auto& [cls, v] : p.entries) {
    d[cls] = from_eigen(v);
  }
  return d;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_std(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = v[i];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace covlearn;

  m.doc() = "Factor-graph state estimation with learned noise covariances";

  py::class_<SE2Pose>(m, "SE2Pose")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0,
           py::arg("y") = 0.0, py::arg("theta") = 0.0)
      .def_readonly("x", &SE2Pose::x)
      .def_readonly("y", &SE2Pose::y)
      .def_readonly("theta", &SE2Pose::theta)
      .def("__repr__", [](const SE2Pose& p) {
        return "SE2Pose(" + std::to_string(p.x) + ", " + std::to_string(p.y) +
               ", " + std::to_string(p.theta) + ")";
      });

  m.def("wrap_angle", &wrap_angle, py::arg("theta"));
  m.def(
      "exp", [](const Vec3& tau) { return covlearn::exp(to_eigen(tau)); },
      py::arg("tau"));
  m.def(
      "log", [](const SE2Pose& p) { return from_eigen(covlearn::log(p)); },
      py::arg("pose"));
  m.def("compose", &compose, py::arg("a"), py::arg("b"));
  m.def("inverse", &inverse, py::arg("pose"));
  m.def(
      "oplus",
      [](const Vec3& tau, const SE2Pose& p) { return oplus(to_eigen(tau), p); },
      py::arg("tau"), py::arg("pose"));
  m.def(
      "ominus",
      [](const SE2Pose& a, const SE2Pose& b) { return from_eigen(ominus(a, b)); },
      py::arg("a"), py::arg("b"));

  py::class_<DatasetSpec>(m, "DatasetSpec")
      .def_property_readonly(
          "id", [](const DatasetSpec& s) { return dataset_id_name(s.id); })
      .def_readwrite("trajectory_length", &DatasetSpec::trajectory_length)
      .def_readwrite("train_count", &DatasetSpec::train_count)
      .def_readwrite("test_count", &DatasetSpec::test_count)
      .def_readwrite("seed", &DatasetSpec::seed)
      .def_property_readonly("latent", [](const DatasetSpec& s) {
        return params_to_dict(NoiseParams(s.latent));
      });

  m.def(
      "standard_spec",
      [](const std::string& id, std::uint64_t seed, int length, int train_count,
         int test_count) {
        DatasetSpec spec = DatasetSpec::standard(dataset_id_from_name(id), seed);
        spec.trajectory_length = length;
        spec.train_count = train_count;
        spec.test_count = test_count;
        return spec;
      },
      py::arg("id"), py::arg("seed") = 0, py::arg("length") = 100,
      py::arg("train_count") = 5, py::arg("test_count") = 20);

  py::class_<NavTrajectory>(m, "NavTrajectory")
      .def_readonly("gt", &NavTrajectory::gt)
      .def_readonly("gps", &NavTrajectory::gps)
      .def_readonly("odom", &NavTrajectory::odom)
      .def_readonly("p", &NavTrajectory::p)
      .def_readonly("switched", &NavTrajectory::switched)
      .def("__len__", &NavTrajectory::length);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("spec", &Dataset::spec)
      .def_readonly("train", &Dataset::train)
      .def_readonly("test", &Dataset::test);

  m.def("make_dataset", &make_dataset, py::arg("spec"));

  py::class_<FactorGraph>(m, "FactorGraph")
      .def_readonly("num_poses", &FactorGraph::num_poses)
      .def("__len__",
           [](const FactorGraph& g) { return g.factors.size(); });

  m.def("build_graph", &build_graph, py::arg("trajectory"));
  m.def("dead_reckoning_init", &dead_reckoning_init, py::arg("trajectory"));

  py::class_<SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("max_iterations", &SolverOptions::max_iterations)
      .def_readwrite("initial_damping", &SolverOptions::initial_damping)
      .def_readwrite("damping_increase", &SolverOptions::damping_increase)
      .def_readwrite("damping_decrease", &SolverOptions::damping_decrease)
      .def_readwrite("error_decrease_tolerance",
                     &SolverOptions::error_decrease_tolerance)
      .def_readwrite("step_norm_tolerance", &SolverOptions::step_norm_tolerance)
      .def_readwrite("gradient_tolerance", &SolverOptions::gradient_tolerance);

  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("estimate", &SolveResult::estimate)
      .def_readonly("final_error", &SolveResult::final_error)
      .def_readonly("iterations", &SolveResult::iterations)
      .def_readonly("converged", &SolveResult::converged)
      .def_readonly("final_gradient_norm", &SolveResult::final_gradient_norm);

  m.def(
      "solve",
      [](const FactorGraph& g, const Trajectory& x0, const ParamDict& theta,
         const SolverOptions& opts) {
        return solve(g, x0, params_from_dict(theta), opts);
      },
      py::arg("graph"), py::arg("x0"), py::arg("theta"),
      py::arg("options") = SolverOptions());

  m.def(
      "total_error",
      [](const FactorGraph& g, const Trajectory& x, const ParamDict& theta) {
        return total_error(g, x, params_from_dict(theta));
      },
      py::arg("graph"), py::arg("states"), py::arg("theta"));

  py::class_<Bounds>(m, "Bounds")
      .def(py::init<>())
      .def_static("uniform", &Bounds::uniform, py::arg("lower"),
                  py::arg("upper"))
      .def_static("tight", &Bounds::tight)
      .def_static("loose", &Bounds::loose);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_outer_iterations", &TrainConfig::max_outer_iterations)
      .def_readwrite("fw_m", &TrainConfig::fw_m)
      .def_readwrite("tau_rel", &TrainConfig::tau_rel)
      .def_readwrite("bounds", &TrainConfig::bounds)
      .def_readwrite("convergence_window", &TrainConfig::convergence_window)
      .def_readwrite("convergence_loss_tolerance",
                     &TrainConfig::convergence_loss_tolerance)
      .def_readwrite("parallel_perturbations",
                     &TrainConfig::parallel_perturbations)
      .def_readwrite("threads", &TrainConfig::threads)
      .def_readwrite("solver", &TrainConfig::solver);

  py::class_<TrainIterationRecord>(m, "TrainIterationRecord")
      .def_readonly("iteration", &TrainIterationRecord::iteration)
      .def_readonly("loss", &TrainIterationRecord::loss)
      .def_readonly("wall_seconds", &TrainIterationRecord::wall_seconds)
      .def_readonly("transl_rmse", &TrainIterationRecord::transl_rmse)
      .def_readonly("rot_rmse", &TrainIterationRecord::rot_rmse)
      .def_readonly("spread", &TrainIterationRecord::spread)
      .def_property_readonly("theta", [](const TrainIterationRecord& r) {
        return to_std(r.theta);
      });

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("method", &TrainReport::method)
      .def_readonly("classes", &TrainReport::classes)
      .def_readonly("iterations", &TrainReport::iterations)
      .def_property_readonly(
          "theta_star",
          [](const TrainReport& r) { return params_to_dict(r.theta_star); })
      .def_readonly("best_loss", &TrainReport::best_loss)
      .def_readonly("best_iteration", &TrainReport::best_iteration)
      .def_readonly("final_spread", &TrainReport::final_spread)
      .def_readonly("aborted", &TrainReport::aborted);

  py::class_<TrainProblem>(m, "TrainProblem")
      .def("__len__", &TrainProblem::size);

  m.def("make_train_problem", &make_train_problem, py::arg("dataset"));
  m.def("tracking_loss", &tracking_loss, py::arg("estimate"), py::arg("gt"));
  m.def(
      "eigen_spread",
      [](const ParamDict& theta) {
        return eigen_spread(params_from_dict(theta));
      },
      py::arg("theta"));
  m.def(
      "fw_direction",
      [](const std::vector<double>& grad, const std::vector<double>& lower,
         const std::vector<double>& upper) {
        return to_std(
            fw_direction(from_std(grad), from_std(lower), from_std(upper)));
      },
      py::arg("grad"), py::arg("lower"), py::arg("upper"));
  m.def(
      "frank_wolfe_step",
      [](const std::vector<double>& grad, const std::vector<double>& theta,
         const std::vector<double>& lower, const std::vector<double>& upper,
         int itr, int m_param) {
        return to_std(frank_wolfe_step(from_std(grad), from_std(theta),
                                       from_std(lower), from_std(upper), itr,
                                       m_param));
      },
      py::arg("grad"), py::arg("theta"), py::arg("lower"), py::arg("upper"),
      py::arg("itr"), py::arg("m"));
  m.def(
      "training_objective",
      [](const TrainProblem& prob, const ParamDict& theta,
         const SolverOptions& opts) {
        return training_objective(prob, params_from_dict(theta), opts);
      },
      py::arg("problem"), py::arg("theta"),
      py::arg("options") = SolverOptions());
  m.def(
      "train",
      [](const TrainProblem& prob, const ParamDict& theta0,
         const TrainConfig& cfg) {
        return train(prob, params_from_dict(theta0), cfg);
      },
      py::arg("problem"), py::arg("theta0"), py::arg("config"));

  py::enum_<ZeroOrderMethod>(m, "ZeroOrderMethod")
      .value("NelderMead", ZeroOrderMethod::NelderMead)
      .value("Powell", ZeroOrderMethod::Powell);

  py::class_<ZeroOrderOptions>(m, "ZeroOrderOptions")
      .def(py::init<>())
      .def_readwrite("method", &ZeroOrderOptions::method)
      .def_readwrite("max_evaluations", &ZeroOrderOptions::max_evaluations)
      .def_readwrite("simplex_scale", &ZeroOrderOptions::simplex_scale)
      .def_readwrite("function_tolerance", &ZeroOrderOptions::function_tolerance)
      .def_readwrite("parameter_tolerance",
                     &ZeroOrderOptions::parameter_tolerance)
      .def_readwrite("bounds", &ZeroOrderOptions::bounds);

  m.def(
      "train_zero_order",
      [](const TrainProblem& prob, const ParamDict& theta0,
         const TrainConfig& cfg, const ZeroOrderOptions& opts) {
        return train_zero_order(prob, params_from_dict(theta0), cfg, opts);
      },
      py::arg("problem"), py::arg("theta0"), py::arg("config"),
      py::arg("options"));

  py::class_<Rmse>(m, "Rmse")
      .def_readonly("transl", &Rmse::transl)
      .def_readonly("rot", &Rmse::rot)
      .def("__repr__", [](const Rmse& r) {
        return "Rmse(transl=" + std::to_string(r.transl) +
               ", rot=" + std::to_string(r.rot) + ")";
      });

  py::class_<EvalResult>(m, "EvalResult")
      .def_readonly("per_trajectory", &EvalResult::per_trajectory)
      .def_readonly("mean", &EvalResult::mean);

  m.def("rmse", &rmse, py::arg("estimate"), py::arg("gt"));
  m.def(
      "evaluate_dataset",
      [](const ParamDict& theta, const Dataset& ds, const SolverOptions& opts) {
        return evaluate_dataset(params_from_dict(theta), ds, opts);
      },
      py::arg("theta"), py::arg("dataset"), py::arg("options") = SolverOptions());
}
