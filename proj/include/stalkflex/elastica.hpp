#pragma once

// Large-deflection elastica of a clamped stalk loaded at its tip through a
// suction pad. In normalized arc length s in [0, 1]:
//
//   theta''(s) = alpha * sin(theta - phi),   theta(0) = 0,   theta'(1) = alpha * R / L
//
// with alpha = F L^2 / EI and phi the angle between force and stalk (pi for
// the adaptation load case, which turns the equation into pendulum form
// theta'' = -alpha * sin(theta)).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stalkflex/error.hpp"
#include "stalkflex/roots.hpp"

namespace stalkflex {

/// Stalk length L and suction-pad radius R (meters). The pad radius is the
/// moment arm of the contact force about the stalk tip.
class BeamGeometry {
 public:
  BeamGeometry(double stalk_length, double pad_radius)
      : stalk_length_(stalk_length), pad_radius_(pad_radius) {
    if (!(stalk_length > 0.0) || !std::isfinite(stalk_length))
      throw Error(ErrorKind::InvalidArgument, "stalk length must be positive and finite");
    if (!(pad_radius >= 0.0) || !std::isfinite(pad_radius))
      throw Error(ErrorKind::InvalidArgument, "pad radius must be non-negative and finite");
    radius_ratio_ = pad_radius_ / stalk_length_;
  }

  /// Unit-length geometry carrying only the ratio R/L.
  static BeamGeometry from_ratio(double radius_ratio) { return BeamGeometry(1.0, radius_ratio); }

  double stalk_length() const noexcept { return stalk_length_; }
  double pad_radius() const noexcept { return pad_radius_; }
  double radius_ratio() const noexcept { return radius_ratio_; }

 private:
  double stalk_length_;
  double pad_radius_;
  double radius_ratio_;
};

/// Normalized tip load alpha = F L^2 / EI acting at `force_angle` to the stalk.
class NormalizedLoad {
 public:
  explicit NormalizedLoad(double alpha, double force_angle = std::numbers::pi)
      : alpha_(alpha), force_angle_(force_angle) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha))
      throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative and finite");
    if (!std::isfinite(force_angle)) throw Error(ErrorKind::InvalidArgument, "force angle must be finite");
  }

  double alpha() const noexcept { return alpha_; }
  double force_angle() const noexcept { return force_angle_; }

 private:
  double alpha_;
  double force_angle_;
};

struct SolverConfig {
  std::size_t grid_points = 1024;
  double boundary_tolerance = 1e-10;
  int max_iterations = 200;
  double alpha_bracket_max = 10.0;
  /// Outer tolerance on |tip angle - surface angle| [rad].
  double angle_tolerance = 1e-6;

  void validate() const {
    if (grid_points < 16) throw Error(ErrorKind::InvalidArgument, "grid_points must be >= 16");
    if (!(boundary_tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "boundary_tolerance must be > 0");
    if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
    if (!(alpha_bracket_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha_bracket_max must be > 0");
    if (!(angle_tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "angle_tolerance must be > 0");
  }
};

struct ElasticaSolution {
  double alpha = 0.0;
  /// theta at s = i / (n - 1), i = 0..n-1.
  std::vector<double> theta_samples;
  double tip_angle = 0.0;
  /// theta'(0), the shooting unknown.
  double initial_slope = 0.0;
  /// |theta'(1) - alpha * R / L|.
  double boundary_residual = 0.0;
};

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

namespace detail {

/// Coiling beyond this is treated as divergence.
inline constexpr double kMaxAbsTheta = 4.0 * std::numbers::pi;

/// alpha * sin(theta - phi) and its theta-derivative. phi = pi is the
/// adaptation case and is evaluated as -alpha * sin(theta) exactly, so the
/// straight beam stays an equilibrium without a round-off drive from sin(pi).
struct LoadTerm {
  double alpha;
  double cos_phi;
  double sin_phi;

  LoadTerm(double alpha_, double phi)
      : alpha(alpha_),
        cos_phi(phi == std::numbers::pi ? -1.0 : std::cos(phi)),
        sin_phi(phi == std::numbers::pi ? 0.0 : std::sin(phi)) {}

  double value(double theta) const { return alpha * (std::sin(theta) * cos_phi - std::cos(theta) * sin_phi); }
  double derivative(double theta) const { return alpha * (std::cos(theta) * cos_phi + std::sin(theta) * sin_phi); }
};

struct Trajectory {
  std::vector<double> theta;
  double tip_slope = 0.0;
};

/// Classical RK4 on (theta, theta') with a fixed step of 1 / (n - 1).
inline Trajectory integrate_state(double alpha, double force_angle, double initial_slope, std::size_t grid_points) {
  if (grid_points < 2) throw Error(ErrorKind::InvalidArgument, "grid_points must be >= 2");
  const double h = 1.0 / static_cast<double>(grid_points - 1);
  const LoadTerm term(alpha, force_angle);
  auto accel = [&](double theta) { return term.value(theta); };

  Trajectory out;
  out.theta.resize(grid_points);
  double theta = 0.0;
  double omega = initial_slope;
  out.theta[0] = theta;
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double k1t = omega;
    const double k1w = accel(theta);
    const double k2t = omega + 0.5 * h * k1w;
    const double k2w = accel(theta + 0.5 * h * k1t);
    const double k3t = omega + 0.5 * h * k2w;
    const double k3w = accel(theta + 0.5 * h * k2t);
    const double k4t = omega + h * k3w;
    const double k4w = accel(theta + h * k3t);
    theta += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
    omega += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    if (!std::isfinite(theta) || !std::isfinite(omega) || std::abs(theta) > kMaxAbsTheta) {
      throw Error(ErrorKind::IntegrationDiverged,
                  "elastica integration diverged at s = " + format_g(static_cast<double>(i) * h));
    }
    out.theta[i] = theta;
  }
  out.tip_slope = omega;
  return out;
}

inline ElasticaSolution zero_solution(double alpha, std::size_t grid_points) {
  ElasticaSolution sol;
  sol.alpha = alpha;
  sol.theta_samples.assign(grid_points, 0.0);
  return sol;
}

}  // namespace detail

/// Integrates the initial-value problem theta(0) = 0, theta'(0) = initial_slope
/// over the unit grid and returns theta at every node.
inline std::vector<double> integrate_elastica_ivp(const NormalizedLoad& load, double initial_slope,
                                                  std::size_t grid_points) {
  if (grid_points < 16) throw Error(ErrorKind::InvalidArgument, "grid_points must be >= 16");
  if (!std::isfinite(initial_slope)) throw Error(ErrorKind::InvalidArgument, "initial slope must be finite");
  return detail::integrate_state(load.alpha(), load.force_angle(), initial_slope, grid_points).theta;
}

/// Shooting on theta'(0): expand a bracket on the tip-slope residual, bisect
/// it down to 1e-6, then polish with secant steps to machine precision.
inline ElasticaSolution solve_shape_shooting(const NormalizedLoad& load, const BeamGeometry& geometry,
                                             const SolverConfig& config) {
  config.validate();
  const double alpha = load.alpha();
  const double target = alpha * geometry.radius_ratio();
  const std::size_t n = config.grid_points;

  auto residual = [&](double slope) {
    return detail::integrate_state(alpha, load.force_angle(), slope, n).tip_slope - target;
  };

  const double r0 = residual(0.0);
  roots::RootResult root{0.0, r0, 0};
  if (r0 != 0.0) {
    // theta'(1) grows with theta'(0) near the origin, so a root lies on the
    // side where the residual changes sign.
    const double direction = r0 < 0.0 ? 1.0 : -1.0;
    double far = direction * std::max(alpha * (geometry.radius_ratio() + 1.0), 1e-3);
    double r_far = residual(far);
    int expansions = 0;
    while (roots::same_sign(r_far, r0) && r_far != 0.0) {
      if (++expansions > config.max_iterations) throw NoSolutionError("no bracket for the initial slope", r_far);
      far *= 2.0;
      r_far = residual(far);
    }
    double lo = 0.0, r_lo = r0, hi = far, r_hi = r_far;
    if (lo > hi) {
      std::swap(lo, hi);
      std::swap(r_lo, r_hi);
    }
    root = roots::bisect_then_secant(residual, lo, r_lo, hi, r_hi, 1e-6, 0.0, config.max_iterations);
  }
  if (!(std::abs(root.fx) <= config.boundary_tolerance))
    throw NoSolutionError("shooting did not meet the boundary tolerance", root.fx);

  auto traj = detail::integrate_state(alpha, load.force_angle(), root.x, n);
  ElasticaSolution sol;
  sol.alpha = alpha;
  sol.initial_slope = root.x;
  sol.tip_angle = traj.theta.back();
  sol.boundary_residual = std::abs(traj.tip_slope - target);
  sol.theta_samples = std::move(traj.theta);
  return sol;
}

/// Independent mesh solver for the same boundary-value problem: fourth-order
/// Lobatto IIIA (Hermite-Simpson) collocation on the first-order system
/// (theta, omega), solved by damped Newton with a sparse LU per step.
inline ElasticaSolution solve_shape_oracle(const NormalizedLoad& load, const BeamGeometry& geometry,
                                           const SolverConfig& config) {
  config.validate();
  using Mat2 = Eigen::Matrix2d;
  using Vec2 = Eigen::Vector2d;

  const double alpha = load.alpha();
  const double phi = load.force_angle();
  const double target = alpha * geometry.radius_ratio();
  const std::size_t n = config.grid_points;
  const auto unknowns = static_cast<Eigen::Index>(2 * n);
  const double h = 1.0 / static_cast<double>(n - 1);

  if (alpha == 0.0) return detail::zero_solution(alpha, n);

  const detail::LoadTerm term(alpha, phi);
  auto f = [&](const Vec2& y) { return Vec2(y[1], term.value(y[0])); };
  auto jac = [&](const Vec2& y) {
    Mat2 j;
    j << 0.0, 1.0, term.derivative(y[0]), 0.0;
    return j;
  };
  auto node = [](const Eigen::VectorXd& y, std::size_t i) {
    return Vec2(y[static_cast<Eigen::Index>(2 * i)], y[static_cast<Eigen::Index>(2 * i + 1)]);
  };

  auto residual = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd r(unknowns);
    r[0] = y[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Vec2 a = node(y, i), b = node(y, i + 1);
      const Vec2 fa = f(a), fb = f(b);
      const Vec2 mid = 0.5 * (a + b) + h / 8.0 * (fa - fb);
      const Vec2 ri = b - a - h / 6.0 * (fa + 4.0 * f(mid) + fb);
      r[static_cast<Eigen::Index>(2 * i + 1)] = ri[0];
      r[static_cast<Eigen::Index>(2 * i + 2)] = ri[1];
    }
    r[unknowns - 1] = y[unknowns - 1] - target;
    return r;
  };

  auto jacobian = [&](const Eigen::VectorXd& y) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(8 * n + 2);
    entries.emplace_back(0, 0, 1.0);
    const Mat2 eye = Mat2::Identity();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const Vec2 a = node(y, i), b = node(y, i + 1);
      const Mat2 ja = jac(a), jb = jac(b);
      const Vec2 mid = 0.5 * (a + b) + h / 8.0 * (f(a) - f(b));
      const Mat2 jm = jac(mid);
      const Mat2 da = -eye - h / 6.0 * (ja + 4.0 * jm * (0.5 * eye + h / 8.0 * ja));
      const Mat2 db = eye - h / 6.0 * (jb + 4.0 * jm * (0.5 * eye - h / 8.0 * jb));
      const auto row = static_cast<int>(2 * i + 1);
      const auto col_a = static_cast<int>(2 * i);
      const auto col_b = static_cast<int>(2 * i + 2);
      for (int p = 0; p < 2; ++p) {
        for (int q = 0; q < 2; ++q) {
          if (da(p, q) != 0.0) entries.emplace_back(row + p, col_a + q, da(p, q));
          if (db(p, q) != 0.0) entries.emplace_back(row + p, col_b + q, db(p, q));
        }
      }
    }
    entries.emplace_back(static_cast<int>(unknowns - 1), static_cast<int>(unknowns - 1), 1.0);
    Eigen::SparseMatrix<double> m(unknowns, unknowns);
    m.setFromTriplets(entries.begin(), entries.end());
    return m;
  };

  // Start from the straight beam; the first Newton step is then the
  // linearized solution.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(unknowns);
  Eigen::VectorXd r = residual(y);
  double r_norm = r.lpNorm<Eigen::Infinity>();
  bool converged = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  for (int it = 0; it < config.max_iterations; ++it) {
    const auto jm = jacobian(y);
    lu.compute(jm);
    if (lu.info() != Eigen::Success) throw NoSolutionError("singular collocation Jacobian", r_norm);
    const Eigen::VectorXd step = lu.solve(-r);

    double lambda = 1.0;
    Eigen::VectorXd trial = y + step;
    Eigen::VectorXd r_trial = residual(trial);
    double trial_norm = r_trial.lpNorm<Eigen::Infinity>();
    while (!(trial_norm <= (1.0 - 0.25 * lambda) * r_norm) && lambda > 1.0 / 1024.0) {
      lambda *= 0.5;
      trial = y + lambda * step;
      r_trial = residual(trial);
      trial_norm = r_trial.lpNorm<Eigen::Infinity>();
    }
    const double step_norm = lambda * step.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(trial_norm)) throw NoSolutionError("collocation Newton produced non-finite values", r_norm);
    if (trial_norm > r_norm && r_norm < 1e-12) {
      // Already at round-off level; a rejected step means no further progress.
      converged = true;
      break;
    }
    y = std::move(trial);
    r = std::move(r_trial);
    r_norm = trial_norm;
    if (step_norm <= 1e-14 * (1.0 + y.lpNorm<Eigen::Infinity>()) || r_norm == 0.0) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoSolutionError("collocation Newton did not converge", r_norm);

  ElasticaSolution sol;
  sol.alpha = alpha;
  sol.theta_samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) sol.theta_samples[i] = y[static_cast<Eigen::Index>(2 * i)];
  sol.theta_samples[0] = 0.0;
  sol.tip_angle = sol.theta_samples.back();
  sol.initial_slope = y[1];
  sol.boundary_residual = std::abs(y[unknowns - 1] - target);
  if (!(sol.boundary_residual <= config.boundary_tolerance))
    throw NoSolutionError("collocation did not meet the boundary tolerance", sol.boundary_residual);
  return sol;
}

/// Normalized centerline (x/L, y/L). Each segment is a chord of length
/// 1 / (n - 1) along the mean angle of its end nodes, so the polyline keeps
/// the inextensible length exactly.
inline std::vector<PlanarPoint> centerline(const ElasticaSolution& solution) {
  const auto& theta = solution.theta_samples;
  if (theta.size() < 2) throw Error(ErrorKind::InvalidArgument, "solution needs at least two samples");
  const double h = 1.0 / static_cast<double>(theta.size() - 1);
  std::vector<PlanarPoint> points(theta.size());
  for (std::size_t i = 1; i < theta.size(); ++i) {
    const double mean = 0.5 * (theta[i - 1] + theta[i]);
    points[i] = {points[i - 1].x + h * std::cos(mean), points[i - 1].y + h * std::sin(mean)};
  }
  return points;
}

inline double polyline_length(std::span<const PlanarPoint> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    length += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
  return length;
}

}  // namespace stalkflex
