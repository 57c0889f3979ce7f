#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covlearn/baselines.hpp"
#include "covlearn/errors.hpp"
#include "covlearn/io.hpp"
#include "covlearn/learner.hpp"
#include "covlearn/metrics.hpp"
#include "covlearn/synth_data.hpp"

namespace {

using namespace covlearn;

struct GenerateArgs {
  std::string dataset = "D1";
  std::uint64_t seed = 0;
  std::string out;
  int length = 100;
  int train_count = 5;
  int test_count = 20;
};

struct TrainArgs {
  std::string dataset;
  std::string method = "ours";
  std::string bounds = "tight";
  std::string init = "swapped";
  std::string theta0_file;
  std::string config_file;
  std::string out;
  int threads = 0;
};

struct EvalArgs {
  std::string dataset;
  std::string theta_file;
  std::vector<std::string> report_files;
  std::string out;
};

struct CurvesArgs {
  std::vector<std::string> report_files;
  std::string out;
};

Bounds resolve_bounds(const std::string& mode) {
  if (mode == "tight") {
    return Bounds::tight();
  }
  if (mode == "loose") {
    return Bounds::loose();
  }
  return read_bounds(mode);
}

/// The far-from-latent initialization: GPS classes take the odometry latents
/// and vice versa.
NoiseParams swapped_init(const DatasetSpec& spec) {
  NoiseParams theta;
  for (const auto& [cls, v] : spec.latent) {
    const std::string counterpart =
        cls.rfind("gps", 0) == 0 ? "odom" + cls.substr(3)
                                 : "gps" + cls.substr(4);
    const auto it = spec.latent.find(counterpart);
    if (it == spec.latent.end()) {
      throw DataError("dataset latents missing counterpart class '" +
                      counterpart + "'");
    }
    theta.entries[cls] = it->second;
  }
  return theta;
}

int run_generate(const GenerateArgs& args) {
  DatasetSpec spec =
      DatasetSpec::standard(dataset_id_from_name(args.dataset), args.seed);
  spec.trajectory_length = args.length;
  spec.train_count = args.train_count;
  spec.test_count = args.test_count;
  const Dataset ds = make_dataset(spec);
  write_dataset(args.out, ds);
  std::cout << "wrote " << args.out << " checksum "
            << checksum_hex(checksum_file(args.out)) << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  const Dataset ds = read_dataset(args.dataset);
  RunConfig rc =
      args.config_file.empty() ? RunConfig{} : read_config(args.config_file);
  rc.train.threads = args.threads;
  rc.train.bounds = resolve_bounds(args.bounds);

  NoiseParams theta0;
  if (!args.theta0_file.empty()) {
    theta0 = read_theta(args.theta0_file);
  } else if (args.init == "latent") {
    theta0 = ds.spec.latent_params();
  } else if (args.init == "swapped") {
    theta0 = swapped_init(ds.spec);
  } else {
    throw ConfigError("unknown init mode '" + args.init +
                      "' (expected swapped or latent)");
  }
  if (!rc.train.bounds.contains(theta0)) {
    std::cerr << "note: initial theta clamped into the bounds\n";
    theta0 = rc.train.bounds.clamp(theta0);
  }

  const TrainProblem prob = make_train_problem(ds);
  TrainReport report;
  if (args.method == "ours") {
    report = train(prob, theta0, rc.train);
  } else if (args.method == "nelder-mead" || args.method == "powell") {
    ZeroOrderOptions zo;
    zo.method = args.method == "powell" ? ZeroOrderMethod::Powell
                                        : ZeroOrderMethod::NelderMead;
    zo.max_evaluations = rc.zo_max_evaluations;
    zo.simplex_scale = rc.zo_simplex_scale;
    zo.bounds = rc.train.bounds;
    report = train_zero_order(prob, theta0, rc.train, zo);
  } else {
    throw ConfigError("unknown method '" + args.method +
                      "' (expected ours, nelder-mead, or powell)");
  }

  ReportMeta meta;
  meta.dataset = dataset_id_name(ds.spec.id);
  meta.seed = ds.spec.seed;
  const std::vector<std::string> classes = theta0.classes();
  meta.bounds_lower = rc.train.bounds.flatten_lower(classes);
  meta.bounds_upper = rc.train.bounds.flatten_upper(classes);
  write_report(args.out, report, meta);
  std::cout << "wrote " << args.out << "\n";
  if (report.aborted) {
    std::cerr << "training aborted: persistent inner-solve failures\n";
    return 4;
  }
  return 0;
}

int run_eval(const EvalArgs& args) {
  const Dataset ds = read_dataset(args.dataset);
  if (args.theta_file.empty() && args.report_files.empty()) {
    throw ConfigError("eval needs --theta and/or --report inputs");
  }

  const auto check_classes = [&ds](const NoiseParams& theta,
                                   const std::string& source) {
    for (const auto& [cls, v] : ds.spec.latent) {
      if (!theta.has(cls)) {
        throw DataError(source + ": missing noise class '" + cls +
                        "' required by the dataset");
      }
    }
  };

  std::vector<EvalRow> rows;
  if (!args.theta_file.empty()) {
    const NoiseParams theta = read_theta(args.theta_file);
    check_classes(theta, args.theta_file);
    const EvalResult r = evaluate_dataset(theta, ds);
    rows.push_back({"Initial", r.mean.transl, r.mean.rot});
  }
  for (const auto& path : args.report_files) {
    const TrainReport report = read_report(path);
    check_classes(report.theta_star, path);
    const EvalResult r = evaluate_dataset(report.theta_star, ds);
    rows.push_back({report.method, r.mean.transl, r.mean.rot});
  }

  std::cout << "dataset " << dataset_id_name(ds.spec.id) << "\n";
  std::cout << "label transl_rmse rot_rmse\n";
  for (const auto& r : rows) {
    std::cout << r.label << " " << format_double(r.transl_rmse) << " "
              << format_double(r.rot_rmse) << "\n";
  }
  if (!args.out.empty()) {
    write_eval(args.out, dataset_id_name(ds.spec.id), rows);
  }
  return 0;
}

int run_curves(const CurvesArgs& args) {
  std::vector<CurveRow> rows;
  for (const auto& path : args.report_files) {
    ReportMeta meta;
    const TrainReport report = read_report(path, &meta);
    const std::string run_id = meta.dataset + "-s" + std::to_string(meta.seed);
    for (const auto& rec : report.iterations) {
      CurveRow row;
      row.method = report.method;
      row.run_id = run_id;
      row.iteration = rec.iteration;
      row.wall_seconds = rec.wall_seconds;
      row.loss = rec.loss;
      row.transl_rmse = rec.transl_rmse;
      row.rot_rmse = rec.rot_rmse;
      rows.push_back(std::move(row));
    }
  }
  write_curves(args.out, rows);
  std::cout << "wrote " << args.out << " rows " << rows.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"covlearn: noise-covariance learning experiments"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* cmd_generate =
      app.add_subcommand("generate", "Write a synthetic dataset file");
  cmd_generate->add_option("--dataset", gen.dataset, "Dataset id (D1..D4)")
      ->required();
  cmd_generate->add_option("--seed", gen.seed, "Master RNG seed");
  cmd_generate->add_option("--out", gen.out, "Output dataset file")->required();
  cmd_generate->add_option("--length", gen.length, "Trajectory length");
  cmd_generate->add_option("--train-count", gen.train_count,
                           "Training trajectories");
  cmd_generate->add_option("--test-count", gen.test_count,
                           "Test trajectories");

  TrainArgs tr;
  CLI::App* cmd_train =
      app.add_subcommand("train", "Learn noise parameters from a dataset");
  cmd_train->add_option("--dataset", tr.dataset, "Dataset file")->required();
  cmd_train->add_option("--method", tr.method,
                        "ours | nelder-mead | powell");
  cmd_train->add_option("--bounds", tr.bounds,
                        "loose | tight | <bounds file>");
  cmd_train->add_option("--init", tr.init,
                        "Initial theta: swapped | latent");
  cmd_train->add_option("--theta0", tr.theta0_file,
                        "Initial theta file (overrides --init)");
  cmd_train->add_option("--config", tr.config_file, "Config file");
  cmd_train->add_option("--out", tr.out, "Output report file")->required();
  cmd_train->add_option("--threads", tr.threads,
                        "Worker threads (0 = auto; COVLEARN_THREADS overrides)");

  EvalArgs ev;
  CLI::App* cmd_eval =
      app.add_subcommand("eval", "Test-set RMSE for thetas and reports");
  cmd_eval->add_option("--dataset", ev.dataset, "Dataset file")->required();
  cmd_eval->add_option("--theta", ev.theta_file,
                       "Theta file evaluated as the Initial row");
  cmd_eval->add_option("--report", ev.report_files,
                       "Report file(s) evaluated by their theta_star");
  cmd_eval->add_option("--out", ev.out, "Optional output table file");

  CurvesArgs cu;
  CLI::App* cmd_curves =
      app.add_subcommand("curves", "Merge reports into plot-ready curve data");
  cmd_curves->add_option("reports", cu.report_files, "Report files")
      ->required();
  cmd_curves->add_option("--out", cu.out, "Output curves file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_generate->parsed()) {
      return run_generate(gen);
    }
    if (cmd_train->parsed()) {
      return run_train(tr);
    }
    if (cmd_eval->parsed()) {
      return run_eval(ev);
    }
    if (cmd_curves->parsed()) {
      return run_curves(cu);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
