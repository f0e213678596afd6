#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stalkflex/elastica.hpp"
#include "stalkflex/error.hpp"
#include "stalkflex/roots.hpp"

namespace stalkflex {

/// Load needed for the pad to lie flat on a surface inclined at
/// `surface_angle`, i.e. the alpha whose tip angle equals that angle.
struct AlphaResult {
  double surface_angle = 0.0;
  double alpha = 0.0;
  double tip_angle_achieved = 0.0;
  int outer_iterations = 0;
  ElasticaSolution inner_solution;
};

struct AlphaTableRow {
  double surface_angle = 0.0;
  std::optional<AlphaResult> result;
  /// Diagnostic when `result` is empty.
  std::string error;
};

inline double degrees(double radians) { return radians * 180.0 / std::numbers::pi; }
inline double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

namespace detail {

inline void check_surface_angle(double surface_angle) {
  if (!std::isfinite(surface_angle) || surface_angle < 0.0 || surface_angle >= 0.5 * std::numbers::pi)
    throw Error(ErrorKind::Domain, "surface angle must lie in [0, 90) degrees, got " +
                                       format_g(degrees(surface_angle)));
}

}  // namespace detail

inline AlphaResult solve_alpha_for_angle(double surface_angle, const BeamGeometry& geometry,
                                         const SolverConfig& config) {
  detail::check_surface_angle(surface_angle);
  config.validate();

  AlphaResult out;
  out.surface_angle = surface_angle;
  if (surface_angle == 0.0) {
    out.inner_solution = solve_shape_shooting(NormalizedLoad(0.0), geometry, config);
    return out;
  }

  int evaluations = 0;
  auto mismatch = [&](double alpha) {
    ++evaluations;
    return solve_shape_shooting(NormalizedLoad(alpha), geometry, config).tip_angle - surface_angle;
  };

  // alpha -> tip angle is increasing; grow the upper end until it overshoots.
  const double cap = config.alpha_bracket_max;
  double hi = std::min(1.0, cap);
  double g_hi = mismatch(hi);
  while (g_hi < 0.0) {
    if (hi >= cap) {
      throw UnreachableAngleError("surface angle " + format_g(degrees(surface_angle)) +
                                      " deg needs alpha above " + format_g(cap) +
                                      "; largest tip angle reached is " +
                                      format_g(degrees(g_hi + surface_angle)) + " deg",
                                  g_hi + surface_angle);
    }
    hi = std::min(2.0 * hi, cap);
    g_hi = mismatch(hi);
  }

  const auto root = roots::bisect_then_secant(mismatch, 0.0, -surface_angle, hi, g_hi, 1e-4,
                                              1e-3 * config.angle_tolerance, config.max_iterations);
  out.alpha = root.x;
  out.inner_solution = solve_shape_shooting(NormalizedLoad(root.x), geometry, config);
  out.tip_angle_achieved = out.inner_solution.tip_angle;
  out.outer_iterations = evaluations;
  if (!(std::abs(out.tip_angle_achieved - surface_angle) <= config.angle_tolerance))
    throw NoSolutionError("alpha search did not reach the angle tolerance", out.tip_angle_achieved - surface_angle);
  return out;
}

/// One row per requested angle, in input order. Angles are solved
/// concurrently; a failed angle yields a row with `error` set.
inline std::vector<AlphaTableRow> generate_alpha_table(std::span<const double> angles, const BeamGeometry& geometry,
                                                       const SolverConfig& config) {
  std::vector<std::future<AlphaTableRow>> pending;
  pending.reserve(angles.size());
  for (const double angle : angles) {
    pending.push_back(std::async(std::launch::async, [angle, geometry, config] {
      AlphaTableRow row;
      row.surface_angle = angle;
      try {
        row.result = solve_alpha_for_angle(angle, geometry, config);
      } catch (const Error& e) {
        row.error = e.what();
      }
      return row;
    }));
  }
  std::vector<AlphaTableRow> rows;
  rows.reserve(pending.size());
  for (auto& f : pending) rows.push_back(f.get());
  return rows;
}

/// Small-angle closed form. Linearizing the pendulum form gives
/// theta(s) = A sin(sqrt(alpha) s), so the tip angle is
/// (R/L) sqrt(alpha) tan(sqrt(alpha)); this inverts that relation.
inline double linearized_alpha(double surface_angle, const BeamGeometry& geometry) {
  const double ratio = geometry.radius_ratio();
  if (!(surface_angle > 0.0) || !(surface_angle < 0.5 * std::numbers::pi))
    throw Error(ErrorKind::OracleOutOfRange, "linearized oracle needs 0 < surface angle < 90 deg");
  if (!(ratio > 0.0)) throw Error(ErrorKind::OracleOutOfRange, "linearized oracle needs a positive pad radius");

  // ratio * u * tan(u) rises from 0 to infinity on (0, pi/2).
  double lo = 0.0;
  double hi = 0.5 * std::numbers::pi;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (ratio * mid * std::tan(mid) < surface_angle)
      lo = mid;
    else
      hi = mid;
  }
  const double u = 0.5 * (lo + hi);
  if (!(u < 0.5 * std::numbers::pi)) throw Error(ErrorKind::OracleOutOfRange, "no root below the tan singularity");
  return u * u;
}

}  // namespace stalkflex
