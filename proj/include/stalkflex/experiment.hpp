#pragma once

// Reduction of adaptation and bending test logs.
//
// Trial files are comma-separated with the header
//   time_s,force_N,displacement_mm,pressure_kPa
// one sample per line; lines starting with '#' are comments. Pressure is
// relative to ambient, so a held vacuum is negative.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "stalkflex/alpha_solver.hpp"
#include "stalkflex/error.hpp"
#include "stalkflex/force_model.hpp"

namespace stalkflex {

inline constexpr std::string_view kTrialHeader = "time_s,force_N,displacement_mm,pressure_kPa";
inline constexpr std::string_view kBendingHeader = "deflection_mm,force_N";
inline constexpr std::string_view kManifestHeader = "file,scenario,angle_deg";

/// Between the self-jamming plateau (about -8 kPa) and the attached plateau
/// (about -60 kPa).
inline constexpr double kDefaultAttachThreshold = -50.0;  // kPa

struct TrialSample {
  double time = 0.0;          // s
  double force = 0.0;         // N
  double displacement = 0.0;  // m
  double pressure = 0.0;      // kPa, relative
};

struct TrialRecord {
  std::string scenario;
  std::optional<double> surface_angle;  // rad
  std::vector<TrialSample> samples;
  /// False when some pressure reading is above ambient.
  bool valid = true;
  std::string issue;
};

struct AttachmentEvent {
  std::size_t sample_index = 0;
  double time = 0.0;
  double pressure = 0.0;
};

struct AngleSummary {
  double surface_angle = 0.0;
  bool attached = false;
  /// Mean over the attached repetitions; empty when none attached.
  std::optional<double> adaptation_force;
  std::size_t repetitions = 0;
  /// Per-repetition forces of the attached repetitions, ascending.
  std::vector<double> repetition_forces;
};

struct AdaptationSummary {
  std::string scenario;
  std::optional<double> ultimate_angle;
  std::optional<double> force_at_ultimate;
  std::vector<AngleSummary> angles;
  std::vector<std::string> warnings;
};

struct ResidualRow {
  double surface_angle = 0.0;
  double measured = 0.0;
  double predicted = 0.0;
  /// predicted - measured [N]
  double absolute_residual = 0.0;
  /// (predicted - measured) / measured; empty when measured is zero.
  std::optional<double> relative_residual;
};

struct ResidualReport {
  std::string scenario;
  std::vector<ResidualRow> rows;
  std::optional<double> mean_abs_relative_error;
};

struct ManifestEntry {
  std::filesystem::path file;
  std::string scenario;
  double angle_deg = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view token) {
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

/// Parses a decimal token scaled by 10^exp10. The shift is applied to the
/// decimal exponent before conversion, so the result is the correctly
/// rounded value of the scaled decimal rather than a rounded quotient.
inline std::optional<double> to_double_scaled(std::string_view token, int exp10) {
  if (!to_double(token)) return std::nullopt;
  std::string shifted;
  const auto e = token.find_first_of("eE");
  if (e == std::string_view::npos) {
    shifted = std::string(token) + "e" + std::to_string(exp10);
  } else {
    int exponent = 0;
    const auto exp_text = token.substr(e + 1);
    const auto* begin = exp_text.data() + (!exp_text.empty() && exp_text.front() == '+' ? 1 : 0);
    const auto [ptr, ec] = std::from_chars(begin, exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || ptr != exp_text.data() + exp_text.size()) return std::nullopt;
    shifted = std::string(token.substr(0, e)) + "e" + std::to_string(exponent + exp10);
  }
  return to_double(shifted);
}

/// Shortest round-trip text of `value`.
inline std::string format_shortest(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

/// Shortest decimal of `value` rendered with its exponent shifted by exp10,
/// in plain positional notation. Inverse of to_double_scaled.
inline std::string format_scaled(double value, int exp10) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
  const std::string_view sci(buf, static_cast<std::size_t>(ptr - buf));
  const auto e = sci.find('e');
  std::string_view mantissa = sci.substr(0, e);
  int exponent = 0;
  const auto exp_text = sci.substr(e + 1);
  std::from_chars(exp_text.data() + (exp_text.front() == '+' ? 1 : 0), exp_text.data() + exp_text.size(), exponent);
  exponent += exp10;

  std::string sign;
  if (!mantissa.empty() && mantissa.front() == '-') {
    sign = "-";
    mantissa.remove_prefix(1);
  }
  std::string digits;
  for (const char c : mantissa)
    if (c != '.') digits.push_back(c);
  if (digits.find_first_not_of('0') == std::string::npos) return sign + "0";
  if (exponent > 20 || exponent < -20) return sign + std::string(mantissa) + "e" + std::to_string(exponent);

  const int point = exponent + 1;
  const int n = static_cast<int>(digits.size());
  std::string out;
  if (point <= 0) {
    out = "0." + std::string(static_cast<std::size_t>(-point), '0') + digits;
  } else if (point >= n) {
    out = digits + std::string(static_cast<std::size_t>(point - n), '0');
  } else {
    out = digits.substr(0, static_cast<std::size_t>(point)) + "." + digits.substr(static_cast<std::size_t>(point));
  }
  return sign + out;
}

/// Reads data lines of a comma-separated file with a fixed header,
/// skipping comments and blank lines; `row` receives (line number, fields).
template <class RowFn>
void read_table(std::istream& input, std::string_view header, RowFn&& row) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(input, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!have_header) {
      if (text != header)
        throw ParseError(line_no, "expected header '" + std::string(header) + "', got '" + std::string(text) + "'");
      have_header = true;
      continue;
    }
    row(line_no, split_fields(text));
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header '" + std::string(header) + "'");
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string());
  return in;
}

}  // namespace detail

inline TrialRecord parse_trial(std::istream& input, std::string scenario, std::optional<double> surface_angle = {}) {
  TrialRecord record;
  record.scenario = std::move(scenario);
  record.surface_angle = surface_angle;

  static constexpr const char* names[] = {"time", "force", "displacement", "pressure"};
  detail::read_table(input, kTrialHeader, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
    double values[4];
    for (std::size_t i = 0; i < 4; ++i) {
      const auto v = i == 2 ? detail::to_double_scaled(fields[i], -3) : detail::to_double(fields[i]);
      if (!v) throw ParseError(line_no, std::string("non-numeric ") + names[i] + " '" + std::string(fields[i]) + "'");
      values[i] = *v;
    }
    const TrialSample s{values[0], values[1], values[2], values[3]};
    if (!record.samples.empty() && !(s.time > record.samples.back().time))
      throw Error(ErrorKind::Validation, "line " + std::to_string(line_no) + ": time is not strictly increasing");
    if (s.pressure > 0.0 && record.valid) {
      record.valid = false;
      record.issue = "positive relative pressure at line " + std::to_string(line_no);
    }
    record.samples.push_back(s);
  });
  if (record.samples.empty()) throw Error(ErrorKind::Validation, "trial has no samples");
  return record;
}

/// Writes a record in the trial file format. Parsing the output yields
/// bit-identical samples.
inline void serialize_trial(const TrialRecord& record, std::ostream& out) {
  out << kTrialHeader << '\n';
  for (const auto& s : record.samples) {
    out << detail::format_shortest(s.time) << ',' << detail::format_shortest(s.force) << ','
        << detail::format_scaled(s.displacement, 3) << ',' << detail::format_shortest(s.pressure) << '\n';
  }
}

inline TrialRecord load_trial(const std::filesystem::path& path, std::string scenario,
                              std::optional<double> surface_angle = {}) {
  auto in = detail::open_input(path);
  try {
    return parse_trial(in, std::move(scenario), surface_angle);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

inline std::vector<BendingSample> parse_bending(std::istream& input) {
  std::vector<BendingSample> samples;
  detail::read_table(input, kBendingHeader, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
    if (fields.size() != 2) throw ParseError(line_no, "expected 2 fields, got " + std::to_string(fields.size()));
    const auto d = detail::to_double_scaled(fields[0], -3);
    if (!d) throw ParseError(line_no, "non-numeric deflection '" + std::string(fields[0]) + "'");
    const auto f = detail::to_double(fields[1]);
    if (!f) throw ParseError(line_no, "non-numeric force '" + std::string(fields[1]) + "'");
    samples.push_back({*d, *f});
  });
  if (samples.empty()) throw Error(ErrorKind::Validation, "bending data has no samples");
  return samples;
}

inline std::vector<BendingSample> bending_samples(const TrialRecord& record) {
  std::vector<BendingSample> out;
  out.reserve(record.samples.size());
  for (const auto& s : record.samples) out.push_back({s.displacement, s.force});
  return out;
}

/// Bending samples from either a bending file or a full trial log, chosen by
/// the header line.
inline std::vector<BendingSample> load_bending_samples(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  std::string line;
  std::string header;
  while (std::getline(in, line)) {
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    header = std::string(text);
    break;
  }
  in.clear();
  in.seekg(0);
  try {
    if (header == kTrialHeader) return bending_samples(parse_trial(in, {}));
    return parse_bending(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

/// Rows of a manifest (`file,scenario,angle_deg`); relative paths resolve
/// against `base_dir`.
inline std::vector<ManifestEntry> parse_manifest(std::istream& input, const std::filesystem::path& base_dir) {
  std::vector<ManifestEntry> entries;
  detail::read_table(input, kManifestHeader, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty()) throw ParseError(line_no, "empty file name");
    if (fields[1].empty()) throw ParseError(line_no, "empty scenario");
    const auto angle = detail::to_double(fields[2]);
    if (!angle) throw ParseError(line_no, "non-numeric angle '" + std::string(fields[2]) + "'");
    std::filesystem::path file{std::string(fields[0])};
    if (file.is_relative()) file = base_dir / file;
    entries.push_back({file, std::string(fields[1]), *angle});
  });
  return entries;
}

inline std::vector<TrialRecord> load_manifest(const std::filesystem::path& manifest) {
  auto in = detail::open_input(manifest);
  std::vector<TrialRecord> trials;
  for (const auto& e : parse_manifest(in, manifest.parent_path()))
    trials.push_back(load_trial(e.file, e.scenario, radians(e.angle_deg)));
  return trials;
}

inline std::optional<AttachmentEvent> detect_attachment(const TrialRecord& record,
                                                        double threshold = kDefaultAttachThreshold) {
  if (!(threshold < 0.0)) throw Error(ErrorKind::Domain, "attachment threshold must be negative");
  for (std::size_t i = 0; i < record.samples.size(); ++i) {
    if (record.samples[i].pressure <= threshold) return AttachmentEvent{i, record.samples[i].time, record.samples[i].pressure};
  }
  return std::nullopt;
}

/// Peak force up to and including the attachment sample. Later samples also
/// carry the weight of the test surface and are ignored.
inline double adaptation_force(const TrialRecord& record, const AttachmentEvent& event) {
  if (event.sample_index >= record.samples.size())
    throw Error(ErrorKind::Domain, "attachment index " + std::to_string(event.sample_index) + " outside trial of " +
                                       std::to_string(record.samples.size()) + " samples");
  double peak = record.samples.front().force;
  for (std::size_t i = 1; i <= event.sample_index; ++i) peak = std::max(peak, record.samples[i].force);
  return peak;
}

/// Force at `deflection` [m], linearly interpolated on the first recorded
/// segment that brackets it.
inline double stiffness_at_deflection(std::span<const BendingSample> samples, double deflection) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].deflection == deflection) return samples[i].force;
    if (i == 0) continue;
    const auto& a = samples[i - 1];
    const auto& b = samples[i];
    if ((a.deflection - deflection) * (b.deflection - deflection) < 0.0) {
      const double t = (deflection - a.deflection) / (b.deflection - a.deflection);
      return a.force + t * (b.force - a.force);
    }
  }
  throw Error(ErrorKind::Range, "deflection " + format_g(deflection * 1e3) + " mm is outside the recorded range");
}

inline double stiffness_at_deflection(const TrialRecord& record, double deflection) {
  const auto samples = bending_samples(record);
  return stiffness_at_deflection(samples, deflection);
}

/// Aggregates the repetitions of one scenario. The result does not depend
/// on the order of `trials`.
inline AdaptationSummary summarize_scenario(std::span<const TrialRecord> trials,
                                            double threshold = kDefaultAttachThreshold) {
  if (trials.empty()) throw Error(ErrorKind::Validation, "no trials to summarize");
  AdaptationSummary summary;
  summary.scenario = trials.front().scenario;

  std::map<double, AngleSummary> by_angle;
  std::vector<std::string> skipped;
  for (const auto& trial : trials) {
    if (trial.scenario != summary.scenario)
      throw Error(ErrorKind::Validation, "mixed scenarios '" + summary.scenario + "' and '" + trial.scenario + "'");
    if (!trial.surface_angle)
      throw Error(ErrorKind::Validation, "trial of scenario '" + trial.scenario + "' has no surface angle");
    if (!trial.valid) {
      skipped.push_back("skipped invalid trial at " + format_g(degrees(*trial.surface_angle)) +
                        " deg: " + trial.issue);
      continue;
    }
    auto& row = by_angle[*trial.surface_angle];
    row.surface_angle = *trial.surface_angle;
    ++row.repetitions;
    if (const auto event = detect_attachment(trial, threshold)) {
      row.attached = true;
      row.repetition_forces.push_back(adaptation_force(trial, *event));
    }
  }
  std::sort(skipped.begin(), skipped.end());
  summary.warnings = std::move(skipped);

  for (auto& [angle, row] : by_angle) {
    if (row.attached) {
      std::sort(row.repetition_forces.begin(), row.repetition_forces.end());
      double sum = 0.0;
      for (const double f : row.repetition_forces) sum += f;
      row.adaptation_force = sum / static_cast<double>(row.repetition_forces.size());
      summary.ultimate_angle = angle;
      summary.force_at_ultimate = row.adaptation_force;
    }
    summary.angles.push_back(std::move(row));
  }
  return summary;
}

/// Splits trials by scenario, keeping scenarios in order of first appearance.
inline std::vector<AdaptationSummary> summarize_all(std::span<const TrialRecord> trials,
                                                    double threshold = kDefaultAttachThreshold) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<TrialRecord>> groups;
  for (const auto& t : trials) {
    auto [it, inserted] = groups.try_emplace(t.scenario);
    if (inserted) order.push_back(t.scenario);
    it->second.push_back(t);
  }
  std::vector<AdaptationSummary> out;
  for (const auto& name : order) out.push_back(summarize_scenario(groups[name], threshold));
  return out;
}

inline constexpr double kAngleMatchTolerance = 1e-9;  // rad

/// Measured versus predicted force at every attached angle of `summary`.
inline ResidualReport compare_theory(const AdaptationSummary& summary,
                                     std::span<const AdaptationPrediction> predictions) {
  ResidualReport report;
  report.scenario = summary.scenario;
  std::vector<std::string> missing;
  double sum_rel = 0.0;
  std::size_t n_rel = 0;
  for (const auto& row : summary.angles) {
    if (!row.attached || !row.adaptation_force) continue;
    const auto match = std::find_if(predictions.begin(), predictions.end(), [&](const AdaptationPrediction& p) {
      return std::abs(p.surface_angle - row.surface_angle) <= kAngleMatchTolerance;
    });
    if (match == predictions.end()) {
      missing.push_back(format_g(degrees(row.surface_angle)));
      continue;
    }
    ResidualRow r;
    r.surface_angle = row.surface_angle;
    r.measured = *row.adaptation_force;
    r.predicted = match->force;
    r.absolute_residual = r.predicted - r.measured;
    if (r.measured != 0.0) {
      r.relative_residual = r.absolute_residual / r.measured;
      sum_rel += std::abs(*r.relative_residual);
      ++n_rel;
    }
    report.rows.push_back(r);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorKind::Coverage, "no prediction for angles (deg): " + list);
  }
  if (n_rel > 0) report.mean_abs_relative_error = sum_rel / static_cast<double>(n_rel);
  return report;
}

}  // namespace stalkflex
