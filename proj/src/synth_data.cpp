#include "covlearn/synth_data.hpp"

#include <cmath>
#include <stdexcept>

#include "covlearn/errors.hpp"

namespace covlearn {

std::string dataset_id_name(DatasetId id) {
  switch (id) {
    case DatasetId::D1: return "D1";
    case DatasetId::D2: return "D2";
    case DatasetId::D3: return "D3";
    case DatasetId::D4: return "D4";
  }
  throw std::invalid_argument("dataset_id_name: bad id");
}

DatasetId dataset_id_from_name(const std::string& name) {
  if (name == "D1") return DatasetId::D1;
  if (name == "D2") return DatasetId::D2;
  if (name == "D3") return DatasetId::D3;
  if (name == "D4") return DatasetId::D4;
  throw ConfigError("unknown dataset id '" + name + "' (expected D1..D4)");
}

std::string factor_class(bool switched, bool gps, int p) {
  std::string base = gps ? "gps" : "odom";
  if (!switched) {
    return base;
  }
  return base + "@p=" + std::to_string(p);
}

DatasetSpec DatasetSpec::standard(DatasetId id, std::uint64_t seed) {
  DatasetSpec spec;
  spec.id = id;
  spec.seed = seed;
  const Eigen::Vector3d gps1(0.5, 0.5, 0.1);
  const Eigen::Vector3d odom1(0.005, 0.005, 0.001);
  const Eigen::Vector3d gps2(2.0, 2.0, 0.4);
  const Eigen::Vector3d odom2(0.01, 0.01, 0.002);
  switch (id) {
    case DatasetId::D1:
      spec.latent = {{"gps", gps1}, {"odom", odom1}};
      break;
    case DatasetId::D2:
      spec.latent = {{"gps", gps2}, {"odom", odom2}};
      break;
    case DatasetId::D3:
      spec.latent = {{"gps@p=0", gps1},
                     {"gps@p=1", 10.0 * gps1},
                     {"odom@p=0", odom1},
                     {"odom@p=1", odom1}};
      break;
    case DatasetId::D4:
      spec.latent = {{"gps@p=0", gps2},
                     {"gps@p=1", 10.0 * gps2},
                     {"odom@p=0", odom2},
                     {"odom@p=1", odom2}};
      break;
  }
  return spec;
}

void DatasetSpec::validate() const {
  if (trajectory_length < 2) {
    throw ConfigError("DatasetSpec: trajectory_length must be >= 2");
  }
  if (train_count < 1 || test_count < 1) {
    throw ConfigError("DatasetSpec: train and test counts must be >= 1");
  }
  if (latent.empty()) {
    throw ConfigError("DatasetSpec: no latent noise parameters");
  }
  for (const auto& [cls, v] : latent) {
    if (!(v.array() > 0.0).all()) {
      throw ConfigError("DatasetSpec: nonpositive latent entry in class '" +
                        cls + "'");
    }
  }
  if (!(forward_min > 0.0) || forward_max < forward_min) {
    throw ConfigError("DatasetSpec: bad forward motion range");
  }
  if (heading_sigma < 0.0) {
    throw ConfigError("DatasetSpec: negative heading sigma");
  }
  if (segment_min < 1 || segment_max < segment_min) {
    throw ConfigError("DatasetSpec: bad p-segment range");
  }
  const bool sw = switched();
  for (const bool gps : {true, false}) {
    for (int p = 0; p < (sw ? 2 : 1); ++p) {
      if (latent.count(factor_class(sw, gps, p)) == 0) {
        throw ConfigError("DatasetSpec: missing latent class '" +
                          factor_class(sw, gps, p) + "'");
      }
    }
  }
}

void NavTrajectory::validate() const {
  const size_t t = gt.size();
  if (t < 1) {
    throw DataError("NavTrajectory: empty trajectory");
  }
  if (gps.size() != t || odom.size() + 1 != t || p.size() != t) {
    throw DataError("NavTrajectory: measurement counts inconsistent with T");
  }
}

Trajectory generate_gt(const DatasetSpec& spec, RngStream& rng) {
  Trajectory out;
  out.reserve(static_cast<size_t>(spec.trajectory_length));
  out.push_back(SE2Pose::identity());
  for (int t = 1; t < spec.trajectory_length; ++t) {
    const double forward = rng.uniform(spec.forward_min, spec.forward_max);
    const double dtheta = rng.normal(0.0, spec.heading_sigma);
    out.push_back(compose(out.back(), SE2Pose(forward, 0.0, dtheta)));
  }
  return out;
}

std::vector<int> generate_p_labels(const DatasetSpec& spec, RngStream& rng) {
  std::vector<int> labels(static_cast<size_t>(spec.trajectory_length), 0);
  if (!spec.switched()) {
    return labels;
  }
  int t = 0;
  int current = 0;
  while (t < spec.trajectory_length) {
    const int len = rng.uniform_int(spec.segment_min, spec.segment_max);
    for (int k = 0; k < len && t < spec.trajectory_length; ++k, ++t) {
      labels[static_cast<size_t>(t)] = current;
    }
    current = 1 - current;
  }
  return labels;
}

void simulate_measurements(const DatasetSpec& spec, NavTrajectory& traj,
                           RngStream& rng) {
  const NoiseParams latent = spec.latent_params();
  latent.validate();
  const bool sw = spec.switched();
  const int t_len = traj.length();

  traj.gps.clear();
  traj.gps.reserve(static_cast<size_t>(t_len));
  for (int t = 0; t < t_len; ++t) {
    const Eigen::Vector3d& th =
        latent.at(factor_class(sw, true, traj.p[static_cast<size_t>(t)]));
    Tangent3 noise;
    for (int k = 0; k < 3; ++k) {
      noise[k] = rng.normal(0.0, std::sqrt(th[k]));
    }
    traj.gps.push_back(oplus(noise, traj.gt[static_cast<size_t>(t)]));
  }

  traj.odom.clear();
  traj.odom.reserve(static_cast<size_t>(t_len - 1));
  for (int t = 1; t < t_len; ++t) {
    const Eigen::Vector3d& th =
        latent.at(factor_class(sw, false, traj.p[static_cast<size_t>(t)]));
    const SE2Pose rel = compose(inverse(traj.gt[static_cast<size_t>(t - 1)]),
                                traj.gt[static_cast<size_t>(t)]);
    Tangent3 noise;
    for (int k = 0; k < 3; ++k) {
      noise[k] = rng.normal(0.0, std::sqrt(th[k]));
    }
    traj.odom.push_back(oplus(noise, rel));
  }
}

NavTrajectory make_trajectory(const DatasetSpec& spec, std::uint64_t stream) {
  RngStream rng(spec.seed, stream);
  NavTrajectory traj;
  traj.switched = spec.switched();
  traj.gt = generate_gt(spec, rng);
  traj.p = generate_p_labels(spec, rng);
  simulate_measurements(spec, traj, rng);
  traj.validate();
  return traj;
}

Dataset make_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.train.reserve(static_cast<size_t>(spec.train_count));
  for (int i = 0; i < spec.train_count; ++i) {
    ds.train.push_back(make_trajectory(spec, static_cast<std::uint64_t>(i)));
  }
  ds.test.reserve(static_cast<size_t>(spec.test_count));
  for (int j = 0; j < spec.test_count; ++j) {
    ds.test.push_back(make_trajectory(
        spec, static_cast<std::uint64_t>(spec.train_count + j)));
  }
  return ds;
}

FactorGraph build_graph(const NavTrajectory& traj) {
  traj.validate();
  FactorGraph g;
  g.num_poses = traj.length();
  g.factors.reserve(static_cast<size_t>(2 * g.num_poses - 1));
  for (int t = 0; t < g.num_poses; ++t) {
    g.factors.push_back(
        Factor::gps(t, traj.gps[static_cast<size_t>(t)],
                    factor_class(traj.switched, true,
                                 traj.p[static_cast<size_t>(t)])));
  }
  for (int t = 1; t < g.num_poses; ++t) {
    g.factors.push_back(
        Factor::odom(t - 1, t, traj.odom[static_cast<size_t>(t - 1)],
                     factor_class(traj.switched, false,
                                  traj.p[static_cast<size_t>(t)])));
  }
  g.validate();
  return g;
}

Trajectory dead_reckoning_init(const NavTrajectory& traj) {
  traj.validate();
  Trajectory x;
  x.reserve(traj.gt.size());
  x.push_back(traj.gps[0]);
  for (size_t t = 1; t < traj.gt.size(); ++t) {
    x.push_back(compose(x.back(), traj.odom[t - 1]));
  }
  return x;
}

}  // namespace covlearn
