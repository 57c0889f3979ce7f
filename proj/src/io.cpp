#include "covlearn/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "covlearn/errors.hpp"

namespace covlearn {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t checksum_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw DataError("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return fnv1a64(ss.str());
}

std::string checksum_hex(std::uint64_t checksum) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, checksum);
  return buf;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) {
    throw DataError("cannot open '" + path + "' for writing");
  }
  return f;
}

void finish_output(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) {
    throw DataError("write failed for '" + path + "'");
  }
}

/// Tokenized line reader that skips blank lines and reports positions in
/// error messages.
class LineFile {
 public:
  explicit LineFile(const std::string& path) : path_(path), f_(path) {
    if (!f_) {
      throw DataError("cannot read '" + path + "'");
    }
  }

  bool next(std::vector<std::string>& toks) {
    std::string line;
    while (std::getline(f_, line)) {
      ++lineno_;
      toks.clear();
      std::istringstream ss(line);
      std::string t;
      while (ss >> t) {
        toks.push_back(t);
      }
      if (!toks.empty()) {
        return true;
      }
    }
    return false;
  }

  void expect_header(const std::string& kind) {
    std::vector<std::string> t;
    if (!next(t) || t.size() != 3 || t[0] != "covlearn" || t[1] != kind ||
        t[2] != "v1") {
      throw DataError(path_ + ": expected 'covlearn " + kind + " v1' header");
    }
  }

  DataError error(const std::string& msg) const {
    return DataError(path_ + ":" + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::string path_;
  std::ifstream f_;
  int lineno_ = 0;
};

double parse_double(const std::string& tok, const LineFile& f) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw f.error("bad number '" + tok + "'");
  }
  return v;
}

long long parse_int(const std::string& tok, const LineFile& f) {
  char* end = nullptr;
  const long long v = std::strtoll(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw f.error("bad integer '" + tok + "'");
  }
  return v;
}

bool parse_bool(const std::string& tok, const LineFile& f) {
  if (tok == "true" || tok == "1") {
    return true;
  }
  if (tok == "false" || tok == "0") {
    return false;
  }
  throw f.error("bad boolean '" + tok + "'");
}

std::uint64_t parse_u64(const std::string& tok, const LineFile& f) {
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    throw f.error("bad unsigned integer '" + tok + "'");
  }
  return v;
}

std::string vec3_str(const Eigen::Vector3d& v) {
  return format_double(v[0]) + " " + format_double(v[1]) + " " +
         format_double(v[2]);
}

Eigen::Vector3d parse_vec3(const std::vector<std::string>& t, size_t at,
                           const LineFile& f) {
  if (t.size() < at + 3) {
    throw f.error("expected 3 numbers");
  }
  return Eigen::Vector3d(parse_double(t[at], f), parse_double(t[at + 1], f),
                         parse_double(t[at + 2], f));
}

std::string pose_str(const SE2Pose& p) {
  return format_double(p.x) + " " + format_double(p.y) + " " +
         format_double(p.theta);
}

SE2Pose parse_pose(const std::vector<std::string>& t, size_t at,
                   const LineFile& f) {
  const Eigen::Vector3d v = parse_vec3(t, at, f);
  return SE2Pose(v[0], v[1], v[2]);
}

}  // namespace

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream f = open_output(path);
  const DatasetSpec& s = ds.spec;
  f << "covlearn dataset v1\n";
  f << "id " << dataset_id_name(s.id) << "\n";
  f << "T " << s.trajectory_length << "\n";
  f << "train_count " << s.train_count << "\n";
  f << "test_count " << s.test_count << "\n";
  f << "seed " << s.seed << "\n";
  f << "forward_min " << format_double(s.forward_min) << "\n";
  f << "forward_max " << format_double(s.forward_max) << "\n";
  f << "heading_sigma " << format_double(s.heading_sigma) << "\n";
  f << "segment_min " << s.segment_min << "\n";
  f << "segment_max " << s.segment_max << "\n";
  for (const auto& [cls, v] : s.latent) {
    f << "latent " << cls << " " << vec3_str(v) << "\n";
  }
  const auto write_split = [&f](const char* name,
                                const std::vector<NavTrajectory>& split) {
    for (size_t i = 0; i < split.size(); ++i) {
      const NavTrajectory& traj = split[i];
      f << "trajectory " << name << " " << i << "\n";
      for (int t = 0; t < traj.length(); ++t) {
        const size_t st = static_cast<size_t>(t);
        f << "pose " << t << " " << pose_str(traj.gt[st]) << " "
          << pose_str(traj.gps[st]) << " ";
        if (t == 0) {
          f << "null";
        } else {
          f << pose_str(traj.odom[st - 1]);
        }
        f << " " << traj.p[st] << "\n";
      }
      f << "end\n";
    }
  };
  write_split("train", ds.train);
  write_split("test", ds.test);
  finish_output(f, path);
}

Dataset read_dataset(const std::string& path) {
  LineFile f(path);
  f.expect_header("dataset");
  Dataset ds;
  DatasetSpec& s = ds.spec;
  bool have_id = false;

  std::vector<std::string> t;
  while (f.next(t)) {
    const std::string& key = t[0];
    if (key == "id" && t.size() == 2) {
      s.id = dataset_id_from_name(t[1]);
      have_id = true;
    } else if (key == "T" && t.size() == 2) {
      s.trajectory_length = static_cast<int>(parse_int(t[1], f));
    } else if (key == "train_count" && t.size() == 2) {
      s.train_count = static_cast<int>(parse_int(t[1], f));
    } else if (key == "test_count" && t.size() == 2) {
      s.test_count = static_cast<int>(parse_int(t[1], f));
    } else if (key == "seed" && t.size() == 2) {
      s.seed = parse_u64(t[1], f);
    } else if (key == "forward_min" && t.size() == 2) {
      s.forward_min = parse_double(t[1], f);
    } else if (key == "forward_max" && t.size() == 2) {
      s.forward_max = parse_double(t[1], f);
    } else if (key == "heading_sigma" && t.size() == 2) {
      s.heading_sigma = parse_double(t[1], f);
    } else if (key == "segment_min" && t.size() == 2) {
      s.segment_min = static_cast<int>(parse_int(t[1], f));
    } else if (key == "segment_max" && t.size() == 2) {
      s.segment_max = static_cast<int>(parse_int(t[1], f));
    } else if (key == "latent" && t.size() == 5) {
      s.latent[t[1]] = parse_vec3(t, 2, f);
    } else if (key == "trajectory" && t.size() == 3) {
      if (!have_id) {
        throw f.error("trajectory before dataset id");
      }
      NavTrajectory traj;
      traj.switched = s.switched();
      std::vector<std::string> row;
      while (true) {
        if (!f.next(row)) {
          throw f.error("unterminated trajectory block");
        }
        if (row[0] == "end") {
          break;
        }
        if (row[0] != "pose" || row.size() < 9) {
          throw f.error("bad trajectory row");
        }
        const int tt = static_cast<int>(parse_int(row[1], f));
        if (tt != traj.length()) {
          throw f.error("out-of-order pose row");
        }
        traj.gt.push_back(parse_pose(row, 2, f));
        traj.gps.push_back(parse_pose(row, 5, f));
        size_t at = 8;
        if (row[at] == "null") {
          if (tt != 0) {
            throw f.error("null odometry only allowed at t=0");
          }
          at += 1;
        } else {
          if (tt == 0) {
            throw f.error("t=0 row must have null odometry");
          }
          traj.odom.push_back(parse_pose(row, at, f));
          at += 3;
        }
        if (row.size() != at + 1) {
          throw f.error("bad trajectory row length");
        }
        traj.p.push_back(static_cast<int>(parse_int(row[at], f)));
      }
      try {
        traj.validate();
      } catch (const DataError& e) {
        throw f.error(e.what());
      }
      if (t[1] == "train") {
        ds.train.push_back(std::move(traj));
      } else if (t[1] == "test") {
        ds.test.push_back(std::move(traj));
      } else {
        throw f.error("unknown split '" + t[1] + "'");
      }
    } else {
      throw f.error("unknown dataset line '" + key + "'");
    }
  }

  if (!have_id) {
    throw DataError(path + ": missing dataset id");
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw DataError(path + ": " + e.what());
  }
  if (static_cast<int>(ds.train.size()) != s.train_count ||
      static_cast<int>(ds.test.size()) != s.test_count) {
    throw DataError(path + ": trajectory counts do not match the spec");
  }
  for (const auto& traj : ds.train) {
    if (traj.length() != s.trajectory_length) {
      throw DataError(path + ": trajectory length does not match the spec");
    }
  }
  for (const auto& traj : ds.test) {
    if (traj.length() != s.trajectory_length) {
      throw DataError(path + ": trajectory length does not match the spec");
    }
  }
  return ds;
}

void write_theta(const std::string& path, const NoiseParams& theta) {
  std::ofstream f = open_output(path);
  f << "covlearn theta v1\n";
  for (const auto& [cls, v] : theta.entries) {
    f << "theta " << cls << " " << vec3_str(v) << "\n";
  }
  finish_output(f, path);
}

NoiseParams read_theta(const std::string& path) {
  LineFile f(path);
  f.expect_header("theta");
  NoiseParams theta;
  std::vector<std::string> t;
  while (f.next(t)) {
    if (t[0] != "theta" || t.size() != 5) {
      throw f.error("expected 'theta <class> <x> <y> <z>'");
    }
    theta.entries[t[1]] = parse_vec3(t, 2, f);
  }
  if (theta.entries.empty()) {
    throw DataError(path + ": no theta entries");
  }
  try {
    theta.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  return theta;
}

void write_bounds(const std::string& path, const Bounds& bounds) {
  std::ofstream f = open_output(path);
  f << "covlearn bounds v1\n";
  f << "lower " << vec3_str(bounds.lower) << "\n";
  f << "upper " << vec3_str(bounds.upper) << "\n";
  for (const auto& [cls, pair] : bounds.per_class) {
    f << "class " << cls << " lower " << vec3_str(pair.first) << "\n";
    f << "class " << cls << " upper " << vec3_str(pair.second) << "\n";
  }
  finish_output(f, path);
}

Bounds read_bounds(const std::string& path) {
  LineFile f(path);
  f.expect_header("bounds");
  Bounds b;
  std::vector<std::string> t;
  while (f.next(t)) {
    if (t[0] == "lower" && t.size() == 4) {
      b.lower = parse_vec3(t, 1, f);
    } else if (t[0] == "upper" && t.size() == 4) {
      b.upper = parse_vec3(t, 1, f);
    } else if (t[0] == "class" && t.size() == 6) {
      auto [it, inserted] =
          b.per_class.try_emplace(t[1], std::make_pair(b.lower, b.upper));
      if (t[2] == "lower") {
        it->second.first = parse_vec3(t, 3, f);
      } else if (t[2] == "upper") {
        it->second.second = parse_vec3(t, 3, f);
      } else {
        throw f.error("expected 'lower' or 'upper'");
      }
    } else {
      throw f.error("unknown bounds line");
    }
  }
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path + ": " + e.what());
  }
  return b;
}

RunConfig read_config(const std::string& path) {
  LineFile f(path);
  f.expect_header("config");
  RunConfig rc;
  std::vector<std::string> t;
  while (f.next(t)) {
    if (t.size() != 2) {
      throw f.error("expected 'key value'");
    }
    const std::string& key = t[0];
    const std::string& val = t[1];
    TrainConfig& tc = rc.train;
    if (key == "max_outer_iterations") {
      tc.max_outer_iterations = static_cast<int>(parse_int(val, f));
    } else if (key == "fw_m") {
      tc.fw_m = static_cast<int>(parse_int(val, f));
    } else if (key == "tau_rel") {
      tc.tau_rel = parse_double(val, f);
    } else if (key == "convergence_window") {
      tc.convergence_window = static_cast<int>(parse_int(val, f));
    } else if (key == "convergence_loss_tolerance") {
      tc.convergence_loss_tolerance = parse_double(val, f);
    } else if (key == "parallel_perturbations") {
      tc.parallel_perturbations = parse_bool(val, f);
    } else if (key == "threads") {
      tc.threads = static_cast<int>(parse_int(val, f));
    } else if (key == "solver_max_iterations") {
      tc.solver.max_iterations = static_cast<int>(parse_int(val, f));
    } else if (key == "solver_initial_damping") {
      tc.solver.initial_damping = parse_double(val, f);
    } else if (key == "solver_damping_increase") {
      tc.solver.damping_increase = parse_double(val, f);
    } else if (key == "solver_damping_decrease") {
      tc.solver.damping_decrease = parse_double(val, f);
    } else if (key == "solver_error_decrease_tolerance") {
      tc.solver.error_decrease_tolerance = parse_double(val, f);
    } else if (key == "solver_step_norm_tolerance") {
      tc.solver.step_norm_tolerance = parse_double(val, f);
    } else if (key == "solver_gradient_tolerance") {
      tc.solver.gradient_tolerance = parse_double(val, f);
    } else if (key == "zo_max_evaluations") {
      rc.zo_max_evaluations = static_cast<int>(parse_int(val, f));
    } else if (key == "zo_simplex_scale") {
      rc.zo_simplex_scale = parse_double(val, f);
    } else {
      throw ConfigError(path + ": unknown config key '" + key + "'");
    }
  }
  return rc;
}

void write_report(const std::string& path, const TrainReport& report,
                  const ReportMeta& meta) {
  std::ofstream f = open_output(path);
  f << "covlearn report v1\n";
  f << "method " << report.method << "\n";
  f << "dataset " << meta.dataset << "\n";
  f << "seed " << meta.seed << "\n";
  f << "classes";
  for (const auto& c : report.classes) {
    f << " " << c;
  }
  f << "\n";
  if (meta.bounds_lower.size() > 0) {
    f << "bounds_lower";
    for (Eigen::Index i = 0; i < meta.bounds_lower.size(); ++i) {
      f << " " << format_double(meta.bounds_lower[i]);
    }
    f << "\n";
  }
  if (meta.bounds_upper.size() > 0) {
    f << "bounds_upper";
    for (Eigen::Index i = 0; i < meta.bounds_upper.size(); ++i) {
      f << " " << format_double(meta.bounds_upper[i]);
    }
    f << "\n";
  }
  f << "timestamp_column wall_seconds\n";
  f << "columns iteration loss wall_seconds transl_rmse rot_rmse spread";
  for (const auto& c : report.classes) {
    for (int k = 0; k < 3; ++k) {
      f << " " << c << "." << k;
    }
  }
  f << "\n";
  for (const auto& rec : report.iterations) {
    f << "iter " << rec.iteration << " " << format_double(rec.loss) << " "
      << format_double(rec.wall_seconds) << " "
      << format_double(rec.transl_rmse) << " " << format_double(rec.rot_rmse)
      << " " << format_double(rec.spread);
    for (Eigen::Index i = 0; i < rec.theta.size(); ++i) {
      f << " " << format_double(rec.theta[i]);
    }
    f << "\n";
  }
  f << "best_iteration " << report.best_iteration << "\n";
  f << "best_loss " << format_double(report.best_loss) << "\n";
  f << "aborted " << (report.aborted ? 1 : 0) << "\n";
  f << "final_spread " << format_double(report.final_spread) << "\n";
  for (const auto& [cls, v] : report.theta_star.entries) {
    f << "theta_star " << cls << " " << vec3_str(v) << "\n";
  }
  finish_output(f, path);
}

TrainReport read_report(const std::string& path, ReportMeta* meta) {
  LineFile f(path);
  f.expect_header("report");
  TrainReport report;
  ReportMeta local;
  std::vector<std::string> t;
  while (f.next(t)) {
    const std::string& key = t[0];
    if (key == "method" && t.size() == 2) {
      report.method = t[1];
    } else if (key == "dataset" && t.size() == 2) {
      local.dataset = t[1];
    } else if (key == "seed" && t.size() == 2) {
      local.seed = parse_u64(t[1], f);
    } else if (key == "classes") {
      report.classes.assign(t.begin() + 1, t.end());
    } else if (key == "bounds_lower") {
      local.bounds_lower.resize(static_cast<Eigen::Index>(t.size()) - 1);
      for (size_t i = 1; i < t.size(); ++i) {
        local.bounds_lower[static_cast<Eigen::Index>(i - 1)] =
            parse_double(t[i], f);
      }
    } else if (key == "bounds_upper") {
      local.bounds_upper.resize(static_cast<Eigen::Index>(t.size()) - 1);
      for (size_t i = 1; i < t.size(); ++i) {
        local.bounds_upper[static_cast<Eigen::Index>(i - 1)] =
            parse_double(t[i], f);
      }
    } else if (key == "timestamp_column" || key == "columns") {
      continue;
    } else if (key == "iter") {
      const size_t m = 3 * report.classes.size();
      if (report.classes.empty() || t.size() != 7 + m) {
        throw f.error("bad iter row");
      }
      TrainIterationRecord rec;
      rec.iteration = static_cast<int>(parse_int(t[1], f));
      rec.loss = parse_double(t[2], f);
      rec.wall_seconds = parse_double(t[3], f);
      rec.transl_rmse = parse_double(t[4], f);
      rec.rot_rmse = parse_double(t[5], f);
      rec.spread = parse_double(t[6], f);
      rec.theta.resize(static_cast<Eigen::Index>(m));
      for (size_t i = 0; i < m; ++i) {
        rec.theta[static_cast<Eigen::Index>(i)] = parse_double(t[7 + i], f);
      }
      report.iterations.push_back(std::move(rec));
    } else if (key == "best_iteration" && t.size() == 2) {
      report.best_iteration = static_cast<int>(parse_int(t[1], f));
    } else if (key == "best_loss" && t.size() == 2) {
      report.best_loss = parse_double(t[1], f);
    } else if (key == "aborted" && t.size() == 2) {
      report.aborted = parse_int(t[1], f) != 0;
    } else if (key == "final_spread" && t.size() == 2) {
      report.final_spread = parse_double(t[1], f);
    } else if (key == "theta_star" && t.size() == 5) {
      report.theta_star.entries[t[1]] = parse_vec3(t, 2, f);
    } else {
      throw f.error("unknown report line '" + key + "'");
    }
  }
  if (report.theta_star.entries.empty()) {
    throw DataError(path + ": report has no theta_star");
  }
  if (meta != nullptr) {
    *meta = std::move(local);
  }
  return report;
}

void write_curves(const std::string& path, const std::vector<CurveRow>& rows) {
  std::ofstream f = open_output(path);
  f << "covlearn curves v1\n";
  f << "timestamp_column wall_seconds\n";
  f << "columns method run_id iteration wall_seconds loss transl_rmse "
       "rot_rmse\n";
  for (const auto& r : rows) {
    f << "row " << r.method << " " << r.run_id << " " << r.iteration << " "
      << format_double(r.wall_seconds) << " " << format_double(r.loss) << " "
      << format_double(r.transl_rmse) << " " << format_double(r.rot_rmse)
      << "\n";
  }
  finish_output(f, path);
}

std::vector<CurveRow> read_curves(const std::string& path) {
  LineFile f(path);
  f.expect_header("curves");
  std::vector<CurveRow> rows;
  std::vector<std::string> t;
  while (f.next(t)) {
    if (t[0] == "timestamp_column" || t[0] == "columns") {
      continue;
    }
    if (t[0] != "row" || t.size() != 8) {
      throw f.error("bad curves row");
    }
    CurveRow r;
    r.method = t[1];
    r.run_id = t[2];
    r.iteration = static_cast<int>(parse_int(t[3], f));
    r.wall_seconds = parse_double(t[4], f);
    r.loss = parse_double(t[5], f);
    r.transl_rmse = parse_double(t[6], f);
    r.rot_rmse = parse_double(t[7], f);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_eval(const std::string& path, const std::string& dataset,
                const std::vector<EvalRow>& rows) {
  std::ofstream f = open_output(path);
  f << "covlearn eval v1\n";
  f << "dataset " << dataset << "\n";
  f << "columns label transl_rmse rot_rmse\n";
  for (const auto& r : rows) {
    f << "row " << r.label << " " << format_double(r.transl_rmse) << " "
      << format_double(r.rot_rmse) << "\n";
  }
  finish_output(f, path);
}

}  // namespace covlearn
