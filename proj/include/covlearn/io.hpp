#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "covlearn/baselines.hpp"
#include "covlearn/learner.hpp"
#include "covlearn/noise.hpp"
#include "covlearn/synth_data.hpp"

namespace covlearn {

/// Round-trip-exact float formatting (%.17g); every writer routes numbers
/// through this so identical values always print identically.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);

/// FNV-1a 64 over the raw file bytes. Throws DataError when unreadable.
std::uint64_t checksum_file(const std::string& path);

std::string checksum_hex(std::uint64_t checksum);

/// All files share a one-line header "covlearn <kind> v1". Report and curves
/// files carry a "timestamp_column" line naming the one column whose values
/// are wall-clock dependent; everything else is deterministic given seeds.

void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

void write_theta(const std::string& path, const NoiseParams& theta);
NoiseParams read_theta(const std::string& path);

void write_bounds(const std::string& path, const Bounds& bounds);
Bounds read_bounds(const std::string& path);

/// File-facing training knobs: the learner config plus the zero-order
/// budget. Every key is optional; missing keys keep the defaults.
struct RunConfig {
  TrainConfig train;
  int zo_max_evaluations = 500;
  double zo_simplex_scale = 0.1;
};

RunConfig read_config(const std::string& path);

struct ReportMeta {
  std::string dataset = "none";
  std::uint64_t seed = 0;
  Eigen::VectorXd bounds_lower;
  Eigen::VectorXd bounds_upper;
};

void write_report(const std::string& path, const TrainReport& report,
                  const ReportMeta& meta);
TrainReport read_report(const std::string& path, ReportMeta* meta = nullptr);

struct CurveRow {
  std::string method;
  std::string run_id;
  int iteration = 0;
  double wall_seconds = 0.0;
  double loss = 0.0;
  double transl_rmse = 0.0;
  double rot_rmse = 0.0;
};

void write_curves(const std::string& path, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curves(const std::string& path);

struct EvalRow {
  std::string label;
  double transl_rmse = 0.0;
  double rot_rmse = 0.0;
};

void write_eval(const std::string& path, const std::string& dataset,
                const std::vector<EvalRow>& rows);

}  // namespace covlearn
