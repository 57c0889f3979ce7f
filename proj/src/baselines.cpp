#include "covlearn/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "covlearn/errors.hpp"
#include "covlearn/metrics.hpp"

namespace covlearn {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;

/// Counts evaluations against the budget and remembers the best point seen
/// anywhere, giving both methods best-so-far return semantics.
class BudgetedObjective {
 public:
  BudgetedObjective(const Objective& obj, int max_evaluations)
      : obj_(obj), max_evaluations_(max_evaluations) {}

  bool exhausted() const { return evaluations_ >= max_evaluations_; }
  int evaluations() const { return evaluations_; }
  const Eigen::VectorXd& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }

  double eval(const Eigen::VectorXd& x) {
    ++evaluations_;
    const double f = obj_(x);
    if (f < best_f_) {
      best_f_ = f;
      best_x_ = x;
    }
    return f;
  }

 private:
  const Objective& obj_;
  int max_evaluations_;
  int evaluations_ = 0;
  Eigen::VectorXd best_x_;
  double best_f_ = std::numeric_limits<double>::infinity();
};

Eigen::VectorXd clip_to_box(const Eigen::VectorXd& x,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  return x.cwiseMax(lower).cwiseMin(upper);
}

void check_box(const Eigen::VectorXd& theta0, const Eigen::VectorXd& lower,
               const Eigen::VectorXd& upper) {
  if (theta0.size() != lower.size() || theta0.size() != upper.size()) {
    throw std::invalid_argument("zero-order: bounds dimension mismatch");
  }
  if (!(upper.array() > lower.array()).all()) {
    throw std::invalid_argument("zero-order: need lower < upper");
  }
}

/// Golden-section minimization of f(x + t*d) over the feasible t-segment
/// inside the box. Moves (x, fx) to the best point found when it improves.
void line_minimize(BudgetedObjective& rec, Eigen::VectorXd& x, double& fx,
                   const Eigen::VectorXd& d, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper, double parameter_tolerance) {
  const double dnorm = d.lpNorm<Eigen::Infinity>();
  if (dnorm <= 0.0) {
    return;
  }
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (d[k] > 0.0) {
      t_lo = std::max(t_lo, (lower[k] - x[k]) / d[k]);
      t_hi = std::min(t_hi, (upper[k] - x[k]) / d[k]);
    } else if (d[k] < 0.0) {
      t_lo = std::max(t_lo, (upper[k] - x[k]) / d[k]);
      t_hi = std::min(t_hi, (lower[k] - x[k]) / d[k]);
    }
  }
  t_lo = std::min(t_lo, 0.0);
  t_hi = std::max(t_hi, 0.0);
  if (!std::isfinite(t_lo) || !std::isfinite(t_hi) ||
      (t_hi - t_lo) * dnorm <= parameter_tolerance) {
    return;
  }

  Eigen::VectorXd best_x = x;
  double best_f = fx;
  const auto probe = [&](double t) {
    const Eigen::VectorXd xt = clip_to_box(x + t * d, lower, upper);
    const double ft = rec.eval(xt);
    if (ft < best_f) {
      best_f = ft;
      best_x = xt;
    }
    return ft;
  };

  double a = t_lo;
  double b = t_hi;
  double c1 = b - kGoldenRatio * (b - a);
  double c2 = a + kGoldenRatio * (b - a);
  if (rec.exhausted()) {
    return;
  }
  double f1 = probe(c1);
  if (rec.exhausted()) {
    return;
  }
  double f2 = probe(c2);
  while ((b - a) * dnorm > parameter_tolerance && !rec.exhausted()) {
    if (f1 < f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - kGoldenRatio * (b - a);
      f1 = probe(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + kGoldenRatio * (b - a);
      f2 = probe(c2);
    }
  }
  if (best_f < fx) {
    x = best_x;
    fx = best_f;
  }
}

std::string method_name(ZeroOrderMethod m) {
  return m == ZeroOrderMethod::NelderMead ? "nelder-mead" : "powell";
}

}  // namespace

void ZeroOrderOptions::validate() const {
  if (max_evaluations < 1) {
    throw ConfigError("ZeroOrderOptions: max_evaluations must be >= 1");
  }
  if (!(simplex_scale > 0.0)) {
    throw ConfigError("ZeroOrderOptions: simplex_scale must be positive");
  }
  if (!(function_tolerance > 0.0) || !(parameter_tolerance > 0.0)) {
    throw ConfigError("ZeroOrderOptions: tolerances must be positive");
  }
}

ZeroOrderResult nelder_mead(const Objective& objective,
                            const Eigen::VectorXd& theta0,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper,
                            const ZeroOrderOptions& opts) {
  opts.validate();
  check_box(theta0, lower, upper);
  const Eigen::Index n = theta0.size();
  BudgetedObjective rec(objective, opts.max_evaluations);

  // Clipping can flatten the simplex against a box face, so a converged
  // simplex is re-seeded around its best vertex until a fresh round stops
  // improving.
  Eigen::VectorXd anchor = clip_to_box(theta0, lower, upper);
  double anchor_f = std::numeric_limits<double>::infinity();
  bool converged = false;

  while (!rec.exhausted()) {
    std::vector<Eigen::VectorXd> v;
    v.reserve(static_cast<size_t>(n) + 1);
    v.push_back(anchor);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd x = v[0];
      double step = opts.simplex_scale * std::abs(x[i]);
      if (step == 0.0) {
        step = opts.simplex_scale;
      }
      if (x[i] + step > upper[i]) {
        x[i] -= step;
      } else {
        x[i] += step;
      }
      v.push_back(clip_to_box(x, lower, upper));
    }

    std::vector<double> fv(v.size(), 0.0);
    bool seeded = true;
    for (size_t i = 0; i < v.size(); ++i) {
      if (rec.exhausted()) {
        seeded = false;
        break;
      }
      fv[i] = rec.eval(v[i]);
    }
    if (!seeded) {
      break;
    }

    bool simplex_done = false;
    while (!rec.exhausted()) {
      std::vector<size_t> order(v.size());
      std::iota(order.begin(), order.end(), size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](size_t a, size_t b) { return fv[a] < fv[b]; });
      std::vector<Eigen::VectorXd> vs;
      std::vector<double> fs;
      for (size_t i : order) {
        vs.push_back(v[i]);
        fs.push_back(fv[i]);
      }
      v = std::move(vs);
      fv = std::move(fs);

      const size_t worst = v.size() - 1;
      double x_spread = 0.0;
      for (size_t i = 1; i < v.size(); ++i) {
        x_spread = std::max(x_spread, (v[i] - v[0]).lpNorm<Eigen::Infinity>());
      }
      if (fv[worst] - fv[0] < opts.function_tolerance &&
          x_spread < opts.parameter_tolerance) {
        simplex_done = true;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (size_t i = 0; i < worst; ++i) {
        centroid += v[i];
      }
      centroid /= static_cast<double>(worst);

      const Eigen::VectorXd xr =
          clip_to_box(centroid + (centroid - v[worst]), lower, upper);
      if (rec.exhausted()) {
        break;
      }
      const double fr = rec.eval(xr);

      if (fr < fv[0]) {
        const Eigen::VectorXd xe =
            clip_to_box(centroid + 2.0 * (xr - centroid), lower, upper);
        if (rec.exhausted()) {
          v[worst] = xr;
          fv[worst] = fr;
          break;
        }
        const double fe = rec.eval(xe);
        if (fe < fr) {
          v[worst] = xe;
          fv[worst] = fe;
        } else {
          v[worst] = xr;
          fv[worst] = fr;
        }
      } else if (fr < fv[worst - 1]) {
        v[worst] = xr;
        fv[worst] = fr;
      } else {
        const bool outside = fr < fv[worst];
        const Eigen::VectorXd xc =
            outside
                ? clip_to_box(centroid + 0.5 * (xr - centroid), lower, upper)
                : clip_to_box(centroid + 0.5 * (v[worst] - centroid), lower,
                              upper);
        if (rec.exhausted()) {
          break;
        }
        const double fc = rec.eval(xc);
        // Strict improvement only: accepting ties keeps the other vertices
        // frozen and cycles forever on flat or clipped regions.
        if (fc < (outside ? fr : fv[worst])) {
          v[worst] = xc;
          fv[worst] = fc;
        } else {
          for (size_t i = 1; i < v.size() && !rec.exhausted(); ++i) {
            v[i] = clip_to_box(v[0] + 0.5 * (v[i] - v[0]), lower, upper);
            fv[i] = rec.eval(v[i]);
          }
        }
      }
    }
    if (!simplex_done) {
      break;
    }

    if (anchor_f - fv[0] < opts.function_tolerance &&
        (v[0] - anchor).lpNorm<Eigen::Infinity>() < opts.parameter_tolerance) {
      converged = true;
      break;
    }
    anchor = v[0];
    anchor_f = fv[0];
  }

  return {rec.best_x(), rec.best_f(), rec.evaluations(), converged};
}

ZeroOrderResult powell(const Objective& objective, const Eigen::VectorXd& theta0,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper,
                       const ZeroOrderOptions& opts) {
  opts.validate();
  check_box(theta0, lower, upper);
  const Eigen::Index n = theta0.size();
  BudgetedObjective rec(objective, opts.max_evaluations);

  Eigen::VectorXd x = clip_to_box(theta0, lower, upper);
  double fx = rec.eval(x);

  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
  }

  bool converged = false;
  while (!rec.exhausted()) {
    const Eigen::VectorXd x_start = x;
    const double f_start = fx;
    double biggest_drop = 0.0;
    size_t drop_index = 0;

    for (size_t i = 0; i < dirs.size() && !rec.exhausted(); ++i) {
      const double f_before = fx;
      line_minimize(rec, x, fx, dirs[i], lower, upper,
                    opts.parameter_tolerance);
      if (f_before - fx > biggest_drop) {
        biggest_drop = f_before - fx;
        drop_index = i;
      }
    }

    const Eigen::VectorXd d_new = x - x_start;
    if (d_new.lpNorm<Eigen::Infinity>() > 0.0 && !rec.exhausted()) {
      line_minimize(rec, x, fx, d_new, lower, upper, opts.parameter_tolerance);
      dirs[drop_index] = d_new;
    }

    if (f_start - fx < opts.function_tolerance &&
        (x - x_start).lpNorm<Eigen::Infinity>() < opts.parameter_tolerance) {
      converged = true;
      break;
    }
  }

  return {rec.best_x(), rec.best_f(), rec.evaluations(), converged};
}

TrainReport train_zero_order(const TrainProblem& prob, const NoiseParams& theta0,
                             const TrainConfig& cfg,
                             const ZeroOrderOptions& opts) {
  cfg.validate();
  opts.validate();
  theta0.validate();
  if (prob.size() == 0) {
    throw std::invalid_argument("train_zero_order: empty problem");
  }
  if (!opts.bounds.contains(theta0)) {
    throw ConfigError("train_zero_order: theta0 violates the bounds");
  }

  const std::vector<std::string> classes = theta0.classes();
  const Eigen::VectorXd lower = opts.bounds.flatten_lower(classes);
  const Eigen::VectorXd upper = opts.bounds.flatten_upper(classes);
  const int n = prob.size();

  TrainReport report;
  report.method = method_name(opts.method);
  report.classes = classes;

  const auto t_start = std::chrono::steady_clock::now();
  int counter = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_iteration = 0;

  const Objective objective = [&](const Eigen::VectorXd& flat) {
    const NoiseParams theta = NoiseParams::unflatten(classes, flat);
    double loss = 0.0;
    double transl = 0.0;
    double rot = 0.0;
    for (int j = 0; j < n; ++j) {
      const SolveResult r =
          solve(prob.graphs[static_cast<size_t>(j)],
                prob.gt[static_cast<size_t>(j)], theta, cfg.solver);
      loss += tracking_loss(r.estimate, prob.gt[static_cast<size_t>(j)]);
      const Rmse m = rmse(r.estimate, prob.gt[static_cast<size_t>(j)]);
      transl += m.transl;
      rot += m.rot;
    }
    loss /= n;

    TrainIterationRecord rec;
    rec.iteration = counter;
    rec.loss = loss;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    rec.transl_rmse = transl / n;
    rec.rot_rmse = rot / n;
    rec.spread = flat.maxCoeff() / flat.minCoeff();
    rec.theta = flat;
    report.iterations.push_back(rec);
    if (loss < best_loss) {
      best_loss = loss;
      best_iteration = counter;
    }
    ++counter;
    return loss;
  };

  const Eigen::VectorXd flat0 = theta0.flatten();
  const ZeroOrderResult result =
      opts.method == ZeroOrderMethod::NelderMead
          ? nelder_mead(objective, flat0, lower, upper, opts)
          : powell(objective, flat0, lower, upper, opts);

  report.theta_star = NoiseParams::unflatten(classes, result.theta);
  report.best_loss = result.value;
  report.best_iteration = best_iteration;
  report.final_spread = eigen_spread(report.theta_star);
  return report;
}

}  // namespace covlearn
