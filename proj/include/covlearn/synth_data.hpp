#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "covlearn/factor_graph.hpp"
#include "covlearn/noise.hpp"
#include "covlearn/rng.hpp"
#include "covlearn/se2.hpp"

namespace covlearn {

enum class DatasetId { D1, D2, D3, D4 };

std::string dataset_id_name(DatasetId id);
DatasetId dataset_id_from_name(const std::string& name);

/// Full recipe for one synthetic dataset; the dataset is a pure function of
/// this struct.
struct DatasetSpec {
  DatasetId id = DatasetId::D1;
  int trajectory_length = 100;
  int train_count = 5;
  int test_count = 20;
  /// Latent noise diagonals per factor class ("gps"/"odom", or the
  /// "gps@p=0" style keys for switched datasets).
  std::map<std::string, Eigen::Vector3d> latent;
  std::uint64_t seed = 0;
  double forward_min = 0.5;
  double forward_max = 1.5;
  double heading_sigma = 0.15;
  int segment_min = 10;
  int segment_max = 30;

  bool switched() const { return id == DatasetId::D3 || id == DatasetId::D4; }

  NoiseParams latent_params() const { return NoiseParams(latent); }

  /// D1-D4 with their default latents; only the seed varies.
  static DatasetSpec standard(DatasetId id, std::uint64_t seed);

  void validate() const;
};

/// One trajectory worth of ground truth and measurements. odom[t-1] is the
/// measured relative pose from t-1 to t; p labels route factors to the
/// p-dependent noise classes on switched datasets (constant 0 otherwise).
struct NavTrajectory {
  Trajectory gt;
  std::vector<SE2Pose> gps;
  std::vector<SE2Pose> odom;
  std::vector<int> p;
  /// True when factors use the p-dependent class keys. Fixed per dataset, not
  /// per observed labels, so the class set is uniform across trajectories.
  bool switched = false;

  int length() const { return static_cast<int>(gt.size()); }
  void validate() const;
};

struct Dataset {
  DatasetSpec spec;
  std::vector<NavTrajectory> train;
  std::vector<NavTrajectory> test;
};

/// Smooth random walk: per step a forward motion ~ U[forward_min,
/// forward_max] and a heading increment ~ N(0, heading_sigma^2), composed
/// left to right from the identity start pose.
Trajectory generate_gt(const DatasetSpec& spec, RngStream& rng);

/// Piecewise-constant binary labels with segment lengths ~ U_int[segment_min,
/// segment_max], alternating 0/1 and starting at 0. All zero for D1/D2.
std::vector<int> generate_p_labels(const DatasetSpec& spec, RngStream& rng);

/// Injects tangent-space Gaussian noise via left-oplus: GPS measurements
/// perturb absolute poses with N(0, diag(theta_gps(p_t))), odometry perturbs
/// ground-truth relative poses with N(0, diag(theta_odom(p_t))).
void simulate_measurements(const DatasetSpec& spec, NavTrajectory& traj,
                           RngStream& rng);

NavTrajectory make_trajectory(const DatasetSpec& spec, std::uint64_t stream);

/// Train and test splits from independent RNG streams derived from the
/// master seed.
Dataset make_dataset(const DatasetSpec& spec);

/// T GPS unary factors plus T-1 odometry binary factors, classed by p label.
FactorGraph build_graph(const NavTrajectory& traj);

/// Noise-class key for a GPS or odometry factor at a given p label
/// ("gps" or "gps@p=1" style).
std::string factor_class(bool switched, bool gps, int p);

/// Evaluation-time initialization: start at the first GPS fix and compose
/// odometry measurements forward.
Trajectory dead_reckoning_init(const NavTrajectory& traj);

}  // namespace covlearn
