#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace covlearn {

/// Per-factor-class diagonal covariance entries. Keys are factor-class
/// identifiers ("gps", "odom", or "gps@p=0" style for switched datasets);
/// values are the positive 3-vectors diag(Sigma_i) in (m^2, m^2, rad^2).
/// The map is ordered, which fixes the flattening order everywhere.
struct NoiseParams {
  std::map<std::string, Eigen::Vector3d> entries;

  NoiseParams() = default;
  explicit NoiseParams(std::map<std::string, Eigen::Vector3d> e)
      : entries(std::move(e)) {}

  const Eigen::Vector3d& at(const std::string& cls) const {
    auto it = entries.find(cls);
    if (it == entries.end()) {
      throw std::invalid_argument("NoiseParams: unknown class '" + cls + "'");
    }
    return it->second;
  }

  bool has(const std::string& cls) const { return entries.count(cls) > 0; }

  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [k, v] : entries) {
      out.push_back(k);
    }
    return out;
  }

  /// Flattened parameter vector theta, class-major in key order, 3 entries
  /// per class.
  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (const auto& [k, v] : entries) {
      out.segment<3>(i) = v;
      i += 3;
    }
    return out;
  }

  static NoiseParams unflatten(const std::vector<std::string>& classes,
                               const Eigen::VectorXd& values) {
    if (values.size() != 3 * static_cast<Eigen::Index>(classes.size())) {
      throw std::invalid_argument("NoiseParams::unflatten: size mismatch");
    }
    NoiseParams out;
    Eigen::Index i = 0;
    for (const auto& cls : classes) {
      out.entries[cls] = values.segment<3>(i);
      i += 3;
    }
    if (out.entries.size() != classes.size()) {
      throw std::invalid_argument("NoiseParams::unflatten: duplicate class");
    }
    return out;
  }

  void validate() const {
    for (const auto& [cls, v] : entries) {
      if (!(v.array() > 0.0).all()) {
        throw std::invalid_argument("NoiseParams: nonpositive entry in class '" +
                                    cls + "'");
      }
    }
  }
};

/// Box constraints on theta: per-coordinate eigenvalue bounds, uniform by
/// default with optional per-class overrides.
struct Bounds {
  Eigen::Vector3d lower = Eigen::Vector3d::Constant(1e-6);
  Eigen::Vector3d upper = Eigen::Vector3d::Constant(1e6);
  std::map<std::string, std::pair<Eigen::Vector3d, Eigen::Vector3d>> per_class;

  static Bounds uniform(double lo, double hi) {
    Bounds b;
    b.lower.setConstant(lo);
    b.upper.setConstant(hi);
    return b;
  }

  /// Tight bounds: eigenvalue spread capped at 100.
  static Bounds tight() { return uniform(0.1, 10.0); }

  /// Loose bounds: effectively positivity only.
  static Bounds loose() { return uniform(1e-6, 1e6); }

  const Eigen::Vector3d& lower_for(const std::string& cls) const {
    auto it = per_class.find(cls);
    return it == per_class.end() ? lower : it->second.first;
  }

  const Eigen::Vector3d& upper_for(const std::string& cls) const {
    auto it = per_class.find(cls);
    return it == per_class.end() ? upper : it->second.second;
  }

  Eigen::VectorXd flatten_lower(const std::vector<std::string>& classes) const {
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(classes.size()));
    Eigen::Index i = 0;
    for (const auto& cls : classes) {
      out.segment<3>(i) = lower_for(cls);
      i += 3;
    }
    return out;
  }

  Eigen::VectorXd flatten_upper(const std::vector<std::string>& classes) const {
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(classes.size()));
    Eigen::Index i = 0;
    for (const auto& cls : classes) {
      out.segment<3>(i) = upper_for(cls);
      i += 3;
    }
    return out;
  }

  bool contains(const NoiseParams& theta) const {
    for (const auto& [cls, v] : theta.entries) {
      const auto& lo = lower_for(cls);
      const auto& hi = upper_for(cls);
      if (!((v.array() >= lo.array()).all() && (v.array() <= hi.array()).all())) {
        return false;
      }
    }
    return true;
  }

  NoiseParams clamp(const NoiseParams& theta) const {
    NoiseParams out = theta;
    for (auto& [cls, v] : out.entries) {
      v = v.cwiseMax(lower_for(cls)).cwiseMin(upper_for(cls));
    }
    return out;
  }

  void validate() const {
    auto check = [](const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
      if (!(lo.array() > 0.0).all() || !(hi.array() > lo.array()).all()) {
        throw std::invalid_argument(
            "Bounds: requires 0 < lambda_min < lambda_max per coordinate");
      }
    };
    check(lower, upper);
    for (const auto& [cls, pair] : per_class) {
      check(pair.first, pair.second);
    }
  }
};

}  // namespace covlearn
