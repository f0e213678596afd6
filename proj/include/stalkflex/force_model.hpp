#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stalkflex/alpha_solver.hpp"
#include "stalkflex/elastica.hpp"
#include "stalkflex/error.hpp"

namespace stalkflex {

/// One point of a tip-load bending test.
struct BendingSample {
  double deflection = 0.0;  // m
  double force = 0.0;       // N
};

/// Effective flexural rigidity of a stalk, fitted from a tip-load bending
/// test with the cantilever relation delta = F L^3 / (3 EI).
struct StiffnessCalibration {
  double flexural_rigidity = 0.0;  // N m^2
  double linear_slope = 0.0;       // N/m
  double fit_quality = 0.0;        // uncentered R^2 of the through-origin fit
  std::string source_label;
  double stalk_length = 0.0;  // m, length the fit was made for
  std::vector<std::string> warnings;
};

struct AdaptationPrediction {
  double surface_angle = 0.0;
  double alpha = 0.0;
  double force = 0.0;  // N
};

struct PredictionRow {
  double surface_angle = 0.0;
  std::optional<AdaptationPrediction> prediction;
  std::string error;
};

/// Deflections beyond this fraction of L leave the linear cantilever regime.
inline constexpr double kSmallDeflectionLimit = 0.25;

inline StiffnessCalibration make_calibration(double flexural_rigidity, const BeamGeometry& geometry,
                                             std::string label = {}) {
  if (!(flexural_rigidity > 0.0) || !std::isfinite(flexural_rigidity))
    throw Error(ErrorKind::Calibration, "flexural rigidity must be positive");
  StiffnessCalibration c;
  c.flexural_rigidity = flexural_rigidity;
  const double l = geometry.stalk_length();
  c.linear_slope = 3.0 * flexural_rigidity / (l * l * l);
  c.fit_quality = 1.0;
  c.source_label = std::move(label);
  c.stalk_length = l;
  return c;
}

inline double alpha_to_force(double alpha, const StiffnessCalibration& calibration, const BeamGeometry& geometry) {
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be non-negative");
  if (!(calibration.flexural_rigidity > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid calibration");
  const double l = geometry.stalk_length();
  return alpha * calibration.flexural_rigidity / (l * l);
}

inline double force_to_alpha(double force, const StiffnessCalibration& calibration, const BeamGeometry& geometry) {
  if (!(force >= 0.0)) throw Error(ErrorKind::InvalidArgument, "force must be non-negative");
  if (!(calibration.flexural_rigidity > 0.0)) throw Error(ErrorKind::InvalidArgument, "invalid calibration");
  const double l = geometry.stalk_length();
  return force * (l * l) / calibration.flexural_rigidity;
}

/// Least-squares slope through the origin, k = sum(F d) / sum(d^2), and
/// EI = k L^3 / 3.
inline StiffnessCalibration calibrate_ei(std::span<const BendingSample> samples, const BeamGeometry& geometry,
                                         std::string label = {}) {
  if (samples.size() < 2) throw Error(ErrorKind::Calibration, "need at least two bending samples");
  double sum_fd = 0.0, sum_dd = 0.0, sum_ff = 0.0, max_deflection = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.deflection) || !std::isfinite(s.force))
      throw Error(ErrorKind::Calibration, "non-finite bending sample");
    if (s.deflection < 0.0) throw Error(ErrorKind::Calibration, "negative deflection in bending samples");
    sum_fd += s.force * s.deflection;
    sum_dd += s.deflection * s.deflection;
    sum_ff += s.force * s.force;
    max_deflection = std::max(max_deflection, s.deflection);
  }
  if (sum_dd == 0.0) throw Error(ErrorKind::Calibration, "all deflections are zero");
  const double k = sum_fd / sum_dd;
  if (!(k > 0.0)) throw Error(ErrorKind::Calibration, "fitted bending stiffness is not positive");

  double sse = 0.0;
  for (const auto& s : samples) {
    const double e = s.force - k * s.deflection;
    sse += e * e;
  }

  const double l = geometry.stalk_length();
  StiffnessCalibration c;
  c.linear_slope = k;
  c.flexural_rigidity = k * l * l * l / 3.0;
  c.fit_quality = sum_ff > 0.0 ? std::clamp(1.0 - sse / sum_ff, 0.0, 1.0) : 0.0;
  c.source_label = std::move(label);
  c.stalk_length = l;
  if (max_deflection >= kSmallDeflectionLimit * l) {
    c.warnings.push_back("max deflection " + format_g(max_deflection * 1e3) + " mm is at or beyond " +
                         format_g(kSmallDeflectionLimit) + " L; linear cantilever fit may be inaccurate");
  }
  return c;
}

inline std::vector<PredictionRow> predict_force_curve(std::span<const double> angles,
                                                      const StiffnessCalibration& calibration,
                                                      const BeamGeometry& geometry, const SolverConfig& config) {
  std::vector<PredictionRow> rows;
  rows.reserve(angles.size());
  for (const auto& t : generate_alpha_table(angles, geometry, config)) {
    PredictionRow row;
    row.surface_angle = t.surface_angle;
    if (t.result) {
      row.prediction = AdaptationPrediction{t.surface_angle, t.result->alpha,
                                            alpha_to_force(t.result->alpha, calibration, geometry)};
    } else {
      row.error = t.error;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stalkflex
