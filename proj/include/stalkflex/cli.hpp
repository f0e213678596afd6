#pragma once

// Batch command-line front end. Every command writes one document to the
// output stream: CSV (the default) or JSON, carrying the resolved
// parameters, the result rows and any warnings.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stalkflex/alpha_solver.hpp"
#include "stalkflex/elastica.hpp"
#include "stalkflex/error.hpp"
#include "stalkflex/experiment.hpp"
#include "stalkflex/force_model.hpp"

namespace stalkflex::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1.0";

enum class Format { Csv, Json };

/// Rounds to the 6 significant digits used for all reported numbers.
inline Json num(double value) {
  if (!std::isfinite(value)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return std::stod(buf);
}

inline Json num(const std::optional<double>& value) { return value ? num(*value) : Json(nullptr); }

class OutputDocument {
 public:
  explicit OutputDocument(std::string command) : command_(std::move(command)) {}

  Json& parameters() { return parameters_; }
  Json& aggregate() { return aggregate_; }
  void add_row(Json row) { rows_.push_back(std::move(row)); }
  void warn(std::string text) { warnings_.push_back(std::move(text)); }
  const Json& rows() const { return rows_; }

  void write(std::ostream& out, Format format) const {
    if (format == Format::Json) {
      Json doc;
      doc["schema_version"] = kSchemaVersion;
      doc["command"] = command_;
      doc["parameters"] = parameters_.is_null() ? Json::object() : parameters_;
      doc["rows"] = rows_;
      if (!aggregate_.is_null()) doc["aggregate"] = aggregate_;
      doc["warnings"] = warnings_;
      out << doc.dump(2) << '\n';
      return;
    }
    out << "# schema_version=" << kSchemaVersion << '\n';
    out << "# command=" << command_ << '\n';
    if (parameters_.is_object())
      for (const auto& [k, v] : parameters_.items()) out << "# parameter " << k << '=' << cell(v) << '\n';

    std::vector<std::string> columns;
    for (const auto& row : rows_)
      for (const auto& [k, v] : row.items())
        if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    if (!columns.empty()) {
      for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
      out << '\n';
      for (const auto& row : rows_) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
          out << (i ? "," : "");
          if (row.contains(columns[i])) out << cell(row[columns[i]]);
        }
        out << '\n';
      }
    }
    if (aggregate_.is_object())
      for (const auto& [k, v] : aggregate_.items()) out << "# aggregate " << k << '=' << cell(v) << '\n';
    for (const auto& w : warnings_) out << "# warning: " << w << '\n';
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + '"';
  }

  static std::string cell(const Json& v) {
    if (v.is_null()) return {};
    if (v.is_string()) return quote(v.get<std::string>());
    if (v.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? ";" : "") + cell(v[i]);
      return quote(joined);
    }
    if (v.is_number_float()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
      return buf;
    }
    return v.dump();
  }

  std::string command_;
  Json parameters_ = Json::object();
  Json rows_ = Json::array();
  Json aggregate_;
  std::vector<std::string> warnings_;
};

/// Degrees from "start:stop:step" (inclusive) or a comma-separated list.
inline std::vector<double> parse_angle_list(const std::string& text) {
  auto number = [&](std::string_view token) {
    const auto v = detail::to_double(detail::trim(token));
    if (!v) throw Error(ErrorKind::InvalidArgument, "bad angle list '" + text + "'");
    return *v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string_view> parts;
    std::string_view rest(text);
    while (true) {
      const auto c = rest.find(':');
      parts.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (parts.size() != 3) throw Error(ErrorKind::InvalidArgument, "angle range must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "angle step must be positive");
    if (stop < start) throw Error(ErrorKind::InvalidArgument, "angle range stop is below start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (const auto field : detail::split_fields(text))
    if (!field.empty()) out.push_back(number(field));
  return out;
}

struct GeometryFlags {
  std::optional<double> radius_ratio;
  std::optional<double> length_mm;
  std::optional<double> radius_mm;

  void attach(CLI::App& cmd, bool length_required) {
    auto* ratio = cmd.add_option("--radius-ratio", radius_ratio, "Pad radius over stalk length R/L (default 0.5)");
    auto* len = cmd.add_option("--length-mm", length_mm, "Stalk length [mm]");
    auto* radius = cmd.add_option("--radius-mm", radius_mm, "Suction-pad radius [mm]");
    radius->excludes(ratio);
    radius->needs(len);
    if (length_required) len->required();
  }

  BeamGeometry resolve(Json& params) const {
    std::optional<BeamGeometry> g;
    if (length_mm) {
      const double l = *length_mm / 1000.0;
      g = radius_mm ? BeamGeometry(l, *radius_mm / 1000.0) : BeamGeometry(l, radius_ratio.value_or(0.5) * l);
    } else {
      g = BeamGeometry::from_ratio(radius_ratio.value_or(0.5));
    }
    params["radius_ratio"] = num(g->radius_ratio());
    params["stalk_length_mm"] = length_mm ? num(g->stalk_length() * 1e3) : Json(nullptr);
    params["pad_radius_mm"] = length_mm ? num(g->pad_radius() * 1e3) : Json(nullptr);
    return *g;
  }
};

struct SolverFlags {
  SolverConfig config;

  void attach(CLI::App& cmd) {
    cmd.add_option("--grid-points", config.grid_points, "Arc-length grid size")->capture_default_str();
    cmd.add_option("--boundary-tolerance", config.boundary_tolerance, "Tip-slope residual bound")
        ->capture_default_str();
    cmd.add_option("--max-iterations", config.max_iterations, "Root-finding iteration cap")->capture_default_str();
    cmd.add_option("--alpha-max", config.alpha_bracket_max, "Upper end of the alpha search")->capture_default_str();
  }

  const SolverConfig& resolve(Json& params) const {
    config.validate();
    params["grid_points"] = config.grid_points;
    params["boundary_tolerance"] = num(config.boundary_tolerance);
    params["max_iterations"] = config.max_iterations;
    params["alpha_bracket_max"] = num(config.alpha_bracket_max);
    params["angle_tolerance"] = num(config.angle_tolerance);
    return config;
  }
};

struct StiffnessFlags {
  std::optional<double> ei;
  std::optional<std::string> bending;
  std::optional<std::string> label;

  void attach(CLI::App& cmd) {
    auto* source = cmd.add_option_group("stiffness", "Exactly one source of EI");
    source->add_option("--ei", ei, "Flexural rigidity EI [N m^2]");
    source->add_option("--bending", bending, "Bending data file used to calibrate EI");
    source->require_option(1);
    cmd.add_option("--label", label, "Label of the stiffness source");
  }

  StiffnessCalibration resolve(const BeamGeometry& geometry, Json& params, OutputDocument& doc) const {
    StiffnessCalibration cal;
    if (ei) {
      cal = make_calibration(*ei, geometry, label.value_or("--ei"));
    } else if (bending) {
      const auto samples = load_bending_samples(*bending);
      cal = calibrate_ei(samples, geometry, label.value_or(std::filesystem::path(*bending).stem().string()));
      for (const auto& w : cal.warnings) doc.warn(w);
    } else {
      throw Error(ErrorKind::InvalidArgument, "one of --ei or --bending is required");
    }
    params["bending"] = bending ? Json(*bending) : Json(nullptr);
    params["source_label"] = cal.source_label;
    params["flexural_rigidity"] = num(cal.flexural_rigidity);
    return cal;
  }
};

inline Json angle_fields(double angle) {
  Json row;
  row["surface_angle_deg"] = num(degrees(angle));
  row["surface_angle"] = num(angle);
  return row;
}

inline Format resolve_format(const std::string& text, Json& params) {
  params["format"] = text;
  return text == "json" ? Format::Json : Format::Csv;
}

/// Runs one command. Returns 0 on success, 1 on a domain or solver error and
/// 2 on a usage error; diagnostics go to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elastica-based suction-cup adaptation toolkit", "stalkflex"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all commands");

  std::string format = "csv";
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  };

  std::optional<OutputDocument> doc;
  Format fmt = Format::Csv;

  // alpha-table
  auto* table_cmd = app.add_subcommand("alpha-table", "Normalized load alpha for a list of surface angles");
  std::string angles_text;
  GeometryFlags table_geo;
  SolverFlags table_solver;
  table_cmd->add_option("--angles", angles_text, "Degrees: start:stop:step or a comma list")->required();
  table_geo.attach(*table_cmd, false);
  table_solver.attach(*table_cmd);
  add_format(table_cmd);
  table_cmd->callback([&] {
    doc.emplace("alpha-table");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    p["angles_deg"] = angles_text;
    const auto geometry = table_geo.resolve(p);
    const auto& config = table_solver.resolve(p);
    std::vector<double> angles;
    for (const double d : parse_angle_list(angles_text)) angles.push_back(radians(d));
    for (const auto& r : generate_alpha_table(angles, geometry, config)) {
      Json row = angle_fields(r.surface_angle);
      if (r.result) {
        row["alpha"] = num(r.result->alpha);
        row["tip_angle_achieved"] = num(r.result->tip_angle_achieved);
        row["outer_iterations"] = r.result->outer_iterations;
        row["boundary_residual"] = num(r.result->inner_solution.boundary_residual);
        row["status"] = "ok";
        row["error"] = nullptr;
      } else {
        row["alpha"] = nullptr;
        row["tip_angle_achieved"] = nullptr;
        row["outer_iterations"] = nullptr;
        row["boundary_residual"] = nullptr;
        row["status"] = "failed";
        row["error"] = r.error;
        doc->warn(format_g(degrees(r.surface_angle)) + " deg: " + r.error);
      }
      doc->add_row(std::move(row));
    }
  });

  // solve / shape share the load selection
  struct LoadFlags {
    std::optional<double> gamma_deg;
    std::optional<double> alpha;
    std::string method = "shooting";
    GeometryFlags geo;
    SolverFlags solver;
  };
  auto attach_load = [&](CLI::App* cmd, LoadFlags& f) {
    auto* g = cmd->add_option("--gamma-deg", f.gamma_deg, "Surface angle [deg]; alpha is solved for");
    auto* a = cmd->add_option("--alpha", f.alpha, "Normalized load alpha = F L^2 / EI");
    g->excludes(a);
    cmd->add_option("--method", f.method, "Shape solver")
        ->check(CLI::IsMember({"shooting", "oracle"}))
        ->capture_default_str();
    f.geo.attach(*cmd, false);
    f.solver.attach(*cmd);
    add_format(cmd);
  };
  struct ResolvedLoad {
    BeamGeometry geometry;
    std::optional<AlphaResult> alpha_result;
    ElasticaSolution solution;
  };
  auto resolve_load = [&](LoadFlags& f, Json& p) {
    if (!f.gamma_deg && !f.alpha) throw Error(ErrorKind::InvalidArgument, "one of --gamma-deg or --alpha is required");
    p["gamma_deg"] = f.gamma_deg ? num(*f.gamma_deg) : Json(nullptr);
    p["alpha"] = f.alpha ? num(*f.alpha) : Json(nullptr);
    p["method"] = f.method;
    const auto geometry = f.geo.resolve(p);
    const auto& config = f.solver.resolve(p);
    std::optional<AlphaResult> ar;
    double alpha = f.alpha.value_or(0.0);
    if (f.gamma_deg) {
      ar = solve_alpha_for_angle(radians(*f.gamma_deg), geometry, config);
      alpha = ar->alpha;
    }
    const NormalizedLoad load(alpha);
    auto solution = f.method == "oracle" ? solve_shape_oracle(load, geometry, config)
                                         : (ar ? ar->inner_solution : solve_shape_shooting(load, geometry, config));
    return ResolvedLoad{geometry, std::move(ar), std::move(solution)};
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve the stalk shape for a surface angle or a load");
  LoadFlags solve_flags;
  attach_load(solve_cmd, solve_flags);
  solve_cmd->callback([&] {
    doc.emplace("solve");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    const auto r = resolve_load(solve_flags, p);
    Json row;
    if (r.alpha_result) {
      row = angle_fields(r.alpha_result->surface_angle);
    } else {
      row["surface_angle_deg"] = nullptr;
      row["surface_angle"] = nullptr;
    }
    row["alpha"] = num(r.solution.alpha);
    row["tip_angle"] = num(r.solution.tip_angle);
    row["tip_angle_deg"] = num(degrees(r.solution.tip_angle));
    row["initial_slope"] = num(r.solution.initial_slope);
    row["boundary_residual"] = num(r.solution.boundary_residual);
    row["outer_iterations"] = r.alpha_result ? Json(r.alpha_result->outer_iterations) : Json(nullptr);
    std::optional<double> lin;
    if (r.alpha_result && r.alpha_result->surface_angle > 0.0 && r.geometry.radius_ratio() > 0.0)
      lin = linearized_alpha(r.alpha_result->surface_angle, r.geometry);
    row["linearized_alpha"] = num(lin);
    doc->add_row(std::move(row));
  });

  auto* shape_cmd = app.add_subcommand("shape", "Export the deformed centerline");
  LoadFlags shape_flags;
  attach_load(shape_cmd, shape_flags);
  shape_cmd->callback([&] {
    doc.emplace("shape");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    const auto r = resolve_load(shape_flags, p);
    const auto points = centerline(r.solution);
    const double n = static_cast<double>(points.size() - 1);
    const bool physical = shape_flags.geo.length_mm.has_value();
    for (std::size_t i = 0; i < points.size(); ++i) {
      Json row;
      row["s"] = num(static_cast<double>(i) / n);
      row["theta"] = num(r.solution.theta_samples[i]);
      row["x"] = num(points[i].x);
      row["y"] = num(points[i].y);
      if (physical) {
        row["x_mm"] = num(points[i].x * r.geometry.stalk_length() * 1e3);
        row["y_mm"] = num(points[i].y * r.geometry.stalk_length() * 1e3);
      }
      doc->add_row(std::move(row));
    }
    doc->aggregate()["alpha"] = num(r.solution.alpha);
    doc->aggregate()["tip_angle"] = num(r.solution.tip_angle);
  });

  // calibrate
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit flexural rigidity EI from bending-test data");
  std::string cal_input;
  double cal_length_mm = 0.0;
  std::optional<std::string> cal_label;
  std::optional<double> cal_at_mm;
  cal_cmd->add_option("--input", cal_input, "Bending data or trial file")->required();
  cal_cmd->add_option("--length-mm", cal_length_mm, "Stalk length [mm]")->required();
  cal_cmd->add_option("--label", cal_label, "Label of the stiffness source (default: file stem)");
  cal_cmd->add_option("--at-deflection-mm", cal_at_mm, "Also report the force at this deflection [mm]");
  add_format(cal_cmd);
  cal_cmd->callback([&] {
    doc.emplace("calibrate");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    const BeamGeometry geometry(cal_length_mm / 1000.0, 0.0);
    const std::string label = cal_label.value_or(std::filesystem::path(cal_input).stem().string());
    p["input"] = cal_input;
    p["length_mm"] = num(cal_length_mm);
    p["label"] = label;
    p["at_deflection_mm"] = num(cal_at_mm);
    const auto samples = load_bending_samples(cal_input);
    const auto cal = calibrate_ei(samples, geometry, label);
    for (const auto& w : cal.warnings) doc->warn(w);
    Json row;
    row["source_label"] = cal.source_label;
    row["stalk_length"] = num(cal.stalk_length);
    row["flexural_rigidity"] = num(cal.flexural_rigidity);
    row["linear_slope"] = num(cal.linear_slope);
    row["fit_quality"] = num(cal.fit_quality);
    row["samples"] = samples.size();
    if (cal_at_mm) row["force_at_deflection"] = num(stiffness_at_deflection(samples, *cal_at_mm / 1000.0));
    doc->add_row(std::move(row));
  });

  // predict-force
  auto* pred_cmd = app.add_subcommand("predict-force", "Adaptation force predicted from alpha and calibrated EI");
  std::string pred_angles;
  GeometryFlags pred_geo;
  SolverFlags pred_solver;
  StiffnessFlags pred_stiff;
  pred_cmd->add_option("--angles", pred_angles, "Degrees: start:stop:step or a comma list")->required();
  pred_geo.attach(*pred_cmd, true);
  pred_solver.attach(*pred_cmd);
  pred_stiff.attach(*pred_cmd);
  add_format(pred_cmd);
  pred_cmd->callback([&] {
    doc.emplace("predict-force");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    p["angles_deg"] = pred_angles;
    const auto geometry = pred_geo.resolve(p);
    const auto& config = pred_solver.resolve(p);
    const auto cal = pred_stiff.resolve(geometry, p, *doc);
    std::vector<double> angles;
    for (const double d : parse_angle_list(pred_angles)) angles.push_back(radians(d));
    for (const auto& r : predict_force_curve(angles, cal, geometry, config)) {
      Json row = angle_fields(r.surface_angle);
      row["alpha"] = r.prediction ? num(r.prediction->alpha) : Json(nullptr);
      row["force"] = r.prediction ? num(r.prediction->force) : Json(nullptr);
      row["status"] = r.prediction ? "ok" : "failed";
      row["error"] = r.prediction ? Json(nullptr) : Json(r.error);
      if (!r.prediction) doc->warn(format_g(degrees(r.surface_angle)) + " deg: " + r.error);
      doc->add_row(std::move(row));
    }
  });

  // analyze / compare share trial ingestion
  struct TrialFlags {
    std::optional<std::string> manifest;
    std::vector<std::string> inputs;
    std::optional<std::string> scenario;
    std::optional<double> angle_deg;
    double threshold_kpa = kDefaultAttachThreshold;
  };
  auto attach_trials = [&](CLI::App* cmd, TrialFlags& f) {
    auto* source = cmd->add_option_group("trials", "Exactly one source of trial logs");
    source->add_option("--manifest", f.manifest, "Manifest listing file,scenario,angle_deg");
    auto* i = source->add_option("--input", f.inputs, "Trial file (repeatable; needs --scenario and --angle-deg)");
    source->require_option(1);
    auto* sc = cmd->add_option("--scenario", f.scenario, "Scenario label");
    auto* an = cmd->add_option("--angle-deg", f.angle_deg, "Surface angle of --input trials [deg]");
    i->needs(sc);
    i->needs(an);
    cmd->add_option("--threshold-kpa", f.threshold_kpa, "Attachment pressure threshold [kPa]")->capture_default_str();
  };
  auto load_trials = [&](const TrialFlags& f, Json& p) {
    p["manifest"] = f.manifest ? Json(*f.manifest) : Json(nullptr);
    p["inputs"] = f.inputs;
    p["scenario"] = f.scenario ? Json(*f.scenario) : Json(nullptr);
    p["angle_deg"] = num(f.angle_deg);
    p["threshold_kpa"] = num(f.threshold_kpa);
    if (!(f.threshold_kpa < 0.0)) throw Error(ErrorKind::Domain, "attachment threshold must be negative");
    std::vector<TrialRecord> trials;
    if (f.manifest) {
      trials = load_manifest(*f.manifest);
    } else {
      for (const auto& path : f.inputs) trials.push_back(load_trial(path, *f.scenario, radians(*f.angle_deg)));
    }
    return trials;
  };

  auto* an_cmd = app.add_subcommand("analyze", "Ultimate adaptation angle and adaptation forces from trial logs");
  TrialFlags an_flags;
  bool per_angle = false;
  attach_trials(an_cmd, an_flags);
  an_cmd->add_flag("--per-angle", per_angle, "One row per scenario and angle");
  add_format(an_cmd);
  an_cmd->callback([&] {
    doc.emplace("analyze");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    p["per_angle"] = per_angle;
    auto trials = load_trials(an_flags, p);
    if (an_flags.manifest && an_flags.scenario) {
      std::erase_if(trials, [&](const TrialRecord& t) { return t.scenario != *an_flags.scenario; });
      if (trials.empty()) throw Error(ErrorKind::Validation, "no trials for scenario '" + *an_flags.scenario + "'");
    }
    for (const auto& s : summarize_all(trials, an_flags.threshold_kpa)) {
      for (const auto& w : s.warnings) doc->warn(s.scenario + ": " + w);
      if (!per_angle) {
        Json row;
        row["scenario"] = s.scenario;
        row["ultimate_angle_deg"] = s.ultimate_angle ? num(degrees(*s.ultimate_angle)) : Json(nullptr);
        row["ultimate_angle"] = num(s.ultimate_angle);
        row["force_at_ultimate"] = num(s.force_at_ultimate);
        std::size_t reps = 0;
        for (const auto& a : s.angles) reps += a.repetitions;
        row["trials"] = reps;
        doc->add_row(std::move(row));
        continue;
      }
      for (const auto& a : s.angles) {
        Json row;
        row["scenario"] = s.scenario;
        row.update(angle_fields(a.surface_angle));
        row["attached"] = a.attached;
        row["adaptation_force"] = num(a.adaptation_force);
        row["repetitions"] = a.repetitions;
        row["attached_repetitions"] = a.repetition_forces.size();
        Json reps = Json::array();
        for (const double f : a.repetition_forces) reps.push_back(num(f));
        row["repetition_forces"] = std::move(reps);
        doc->add_row(std::move(row));
      }
    }
  });

  auto* cmp_cmd = app.add_subcommand("compare", "Measured adaptation force against the elastica prediction");
  TrialFlags cmp_flags;
  GeometryFlags cmp_geo;
  SolverFlags cmp_solver;
  StiffnessFlags cmp_stiff;
  attach_trials(cmp_cmd, cmp_flags);
  cmp_geo.attach(*cmp_cmd, true);
  cmp_solver.attach(*cmp_cmd);
  cmp_stiff.attach(*cmp_cmd);
  add_format(cmp_cmd);
  cmp_cmd->callback([&] {
    doc.emplace("compare");
    auto& p = doc->parameters();
    fmt = resolve_format(format, p);
    auto trials = load_trials(cmp_flags, p);
    const auto geometry = cmp_geo.resolve(p);
    const auto& config = cmp_solver.resolve(p);
    const auto cal = cmp_stiff.resolve(geometry, p, *doc);

    std::string scenario;
    if (cmp_flags.scenario) {
      scenario = *cmp_flags.scenario;
    } else {
      scenario = trials.front().scenario;
      for (const auto& t : trials)
        if (t.scenario != scenario)
          throw Error(ErrorKind::InvalidArgument, "manifest has several scenarios; choose one with --scenario");
    }
    std::erase_if(trials, [&](const TrialRecord& t) { return t.scenario != scenario; });
    if (trials.empty()) throw Error(ErrorKind::Validation, "no trials for scenario '" + scenario + "'");
    const auto summary = summarize_scenario(trials, cmp_flags.threshold_kpa);
    for (const auto& w : summary.warnings) doc->warn(w);

    std::vector<double> angles;
    for (const auto& a : summary.angles)
      if (a.attached) angles.push_back(a.surface_angle);
    std::vector<AdaptationPrediction> predictions;
    for (const auto& r : predict_force_curve(angles, cal, geometry, config)) {
      if (r.prediction)
        predictions.push_back(*r.prediction);
      else
        doc->warn(format_g(degrees(r.surface_angle)) + " deg: " + r.error);
    }
    const auto report = compare_theory(summary, predictions);
    for (const auto& r : report.rows) {
      Json row = angle_fields(r.surface_angle);
      const auto match = std::find_if(predictions.begin(), predictions.end(), [&](const AdaptationPrediction& pr) {
        return std::abs(pr.surface_angle - r.surface_angle) <= kAngleMatchTolerance;
      });
      row["alpha"] = num(match->alpha);
      row["measured"] = num(r.measured);
      row["predicted"] = num(r.predicted);
      row["absolute_residual"] = num(r.absolute_residual);
      row["relative_residual"] = num(r.relative_residual);
      doc->add_row(std::move(row));
    }
    doc->aggregate()["scenario"] = report.scenario;
    doc->aggregate()["mean_abs_relative_error"] = num(report.mean_abs_relative_error);
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "usage error: " << e.what() << '\n';
    err << "run with --help for usage\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (!doc) {
    err << "usage error: no command\n";
    return 2;
  }
  doc->write(out, fmt);
  return 0;
}

}  // namespace stalkflex::cli
