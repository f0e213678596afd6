#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stalkflex/experiment.hpp"

using namespace stalkflex;

namespace {

const std::filesystem::path kFixtures{STALKFLEX_FIXTURE_DIR};

TrialRecord parse(const std::string& text, std::string scenario = "s", std::optional<double> angle = {}) {
  std::istringstream in(text);
  return parse_trial(in, std::move(scenario), angle);
}

/// Pressure ramp from -8 to -60 kPa in 13 steps of -4.333..., crossing
/// -50 kPa at index 10.
TrialRecord ramp_trial() {
  TrialRecord r;
  r.scenario = "ramp";
  for (int i = 0; i <= 12; ++i) {
    const double p = -8.0 - 52.0 * i / 12.0;
    r.samples.push_back({0.1 * i, 0.05 * i, 0.0001 * i, p});
  }
  return r;
}

TrialRecord synthetic(const std::string& scenario, double angle_deg, double peak, bool attaches,
                      double peak_fraction = 0.7) {
  TrialRecord r;
  r.scenario = scenario;
  r.surface_angle = radians(angle_deg);
  const int n = 20;
  const int peak_at = static_cast<int>(peak_fraction * n);
  for (int i = 0; i <= n; ++i) {
    const double f = i <= peak_at ? peak * i / peak_at : peak * 0.9;
    const double p = attaches && i >= peak_at ? -60.0 : -8.0;
    r.samples.push_back({0.1 * i, f, 0.001 * i, p});
  }
  return r;
}

std::vector<TrialRecord> manifest_scenario(const std::string& name) {
  std::vector<TrialRecord> out;
  for (auto& t : load_manifest(kFixtures / "adaptation" / "manifest.csv"))
    if (t.scenario == name) out.push_back(std::move(t));
  return out;
}

}  // namespace

TEST(ParseTrial, ThreeRows) {
  const auto r = parse(
      "# comment\n"
      "time_s,force_N,displacement_mm,pressure_kPa\n"
      "0.0,0.00,0.0,-8\n"
      "0.1,0.25,1.5,-30\n"
      "\n"
      "0.2,0.48,3.0,-61\n",
      "20mm Granular", radians(30));
  ASSERT_EQ(r.samples.size(), 3u);
  EXPECT_EQ(r.scenario, "20mm Granular");
  EXPECT_EQ(*r.surface_angle, radians(30));
  EXPECT_EQ(r.samples[1].force, 0.25);
  EXPECT_EQ(r.samples[1].displacement, 0.0015);
  EXPECT_EQ(r.samples[2].pressure, -61.0);
  EXPECT_TRUE(r.valid);
}

TEST(ParseTrial, HeaderOnlyIsValidationError) {
  try {
    parse("time_s,force_N,displacement_mm,pressure_kPa\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
}

TEST(ParseTrial, NonNumericFieldNamesLine) {
  try {
    parse("time_s,force_N,displacement_mm,pressure_kPa\n0.0,abc,0,-8\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("force"), std::string::npos);
  }
}

TEST(ParseTrial, Rejections) {
  EXPECT_THROW(parse("time,force\n0,0\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("time_s,force_N,displacement_mm,pressure_kPa\n0,0,0\n"), ParseError);
  EXPECT_THROW(parse("time_s,force_N,displacement_mm,pressure_kPa\n0,0,0,-8\n0,0,0,-8\n"), Error);
  EXPECT_THROW(parse("time_s,force_N,displacement_mm,pressure_kPa\n0,nan,0,-8\n"), ParseError);
}

TEST(ParseTrial, PositivePressureMarksInvalid) {
  const auto r = parse("time_s,force_N,displacement_mm,pressure_kPa\n0,0,0,-8\n0.1,0.1,0.1,2.5\n");
  EXPECT_FALSE(r.valid);
  EXPECT_NE(r.issue.find("line 3"), std::string::npos);
}

TEST(Attachment, RampCrossesThreshold) {
  const auto r = ramp_trial();
  const auto e = detect_attachment(r, -50.0);
  ASSERT_TRUE(e);
  // First sample at or below -50 kPa: -8 - 52 i / 12 <= -50  =>  i >= 9.69.
  EXPECT_EQ(e->sample_index, 10u);
  EXPECT_EQ(e->time, r.samples[10].time);
}

TEST(Attachment, SelfJammingOnlyNeverAttaches) {
  TrialRecord r;
  for (int i = 0; i < 10; ++i) r.samples.push_back({0.1 * i, 0.1, 0.0, -8.0});
  EXPECT_FALSE(detect_attachment(r));
}

TEST(Attachment, SingleSampleAtVacuum) {
  TrialRecord r;
  r.samples.push_back({0.0, 0.3, 0.0, -60.0});
  const auto e = detect_attachment(r);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->sample_index, 0u);
  EXPECT_EQ(adaptation_force(r, *e), 0.3);
}

TEST(Attachment, ThresholdMustBeNegative) { EXPECT_THROW(detect_attachment(ramp_trial(), 0.0), Error); }

TEST(AdaptationForce, PeakBeforeAttachment) {
  const auto r = synthetic("x", 30, 0.48, true);
  EXPECT_EQ(adaptation_force(r, *detect_attachment(r)), 0.48);
}

TEST(AdaptationForce, ZeroForce) {
  TrialRecord r;
  for (int i = 0; i < 4; ++i) r.samples.push_back({0.1 * i, 0.0, 0.0, i == 3 ? -60.0 : -8.0});
  EXPECT_EQ(adaptation_force(r, *detect_attachment(r)), 0.0);
}

TEST(AdaptationForce, InteriorPeakIsKept) {
  // The force peaks while the pad seats, then relaxes before the seal forms.
  TrialRecord r;
  const double forces[] = {0.0, 0.6, 1.31, 1.1, 0.9, 0.95, 2.0};
  const double pressures[] = {-8, -8, -9, -12, -30, -55, -60};
  for (int i = 0; i < 7; ++i) r.samples.push_back({0.1 * i, forces[i], 0.0, pressures[i]});
  const auto e = detect_attachment(r);
  EXPECT_EQ(e->sample_index, 5u);
  EXPECT_EQ(adaptation_force(r, *e), 1.31);
  EXPECT_THROW(adaptation_force(r, AttachmentEvent{7, 0, 0}), Error);
}

TEST(BendingStiffness, InterpolatedFixture) {
  const auto s = load_bending_samples(kFixtures / "bending_trials" / "granular_20mm_60kPa.csv");
  EXPECT_NEAR(stiffness_at_deflection(s, 0.005), 1.02, 1e-9);
}

TEST(BendingStiffness, ExactSampleFixture) {
  const auto r = load_trial(kFixtures / "bending_trials" / "ecoflex_stalk.csv", "Ecoflex stalk");
  EXPECT_NEAR(stiffness_at_deflection(r, 0.005), 0.51, 1e-12);
}

TEST(BendingStiffness, BendingFileFormat) {
  const auto s = load_bending_samples(kFixtures / "bending" / "granular_20mm_60kPa.csv");
  EXPECT_NEAR(stiffness_at_deflection(s, 0.005), 1.02, 1e-12);
  EXPECT_THROW(stiffness_at_deflection(s, 1.0), Error);
}

TEST(BendingStiffness, Interpolation) {
  const std::vector<BendingSample> s{{0.0, 0.0}, {0.002, 0.4}, {0.004, 1.0}};
  EXPECT_NEAR(stiffness_at_deflection(s, 0.003), 0.7, 1e-12);
  EXPECT_EQ(stiffness_at_deflection(s, 0.002), 0.4);
  try {
    stiffness_at_deflection(s, 0.005);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
  }
}

TEST(Summaries, Granular20mm) {
  const auto trials = manifest_scenario("20mm Granular");
  const auto s = summarize_scenario(trials);
  ASSERT_TRUE(s.ultimate_angle);
  EXPECT_NEAR(degrees(*s.ultimate_angle), 85.0, 1e-9);
  EXPECT_NEAR(*s.force_at_ultimate, 0.33, 1e-9);
  EXPECT_EQ(s.angles.size(), 7u);
  EXPECT_FALSE(s.angles.back().attached);
  EXPECT_EQ(s.angles.back().repetitions, 4u);
}

TEST(Summaries, Dragonskin) {
  const auto s = summarize_scenario(manifest_scenario("Dragonskin 10"));
  EXPECT_NEAR(degrees(*s.ultimate_angle), 45.0, 1e-9);
  EXPECT_NEAR(*s.force_at_ultimate, 4.96, 1e-9);
}

TEST(Summaries, AllScenariosInManifestOrder) {
  const auto all = summarize_all(load_manifest(kFixtures / "adaptation" / "manifest.csv"));
  const std::vector<std::pair<std::string, std::pair<double, double>>> expected{
      {"20mm Granular", {85, 0.33}}, {"10mm Granular", {80, 0.43}},  {"5mm Granular", {55, 1.17}},
      {"Ecoflex 00-10", {70, 1.09}}, {"Dragonskin 10", {45, 4.96}}, {"Ecoflex 00-10 suction pad", {45, 0.69}}};
  ASSERT_EQ(all.size(), expected.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].scenario, expected[i].first);
    EXPECT_NEAR(degrees(*all[i].ultimate_angle), expected[i].second.first, 1e-9);
    EXPECT_NEAR(*all[i].force_at_ultimate, expected[i].second.second, 1e-9);
  }
}

TEST(Summaries, NoAttachment) {
  const std::vector<TrialRecord> trials{synthetic("n", 15, 0.2, false), synthetic("n", 30, 0.3, false)};
  const auto s = summarize_scenario(trials);
  EXPECT_FALSE(s.ultimate_angle);
  EXPECT_FALSE(s.force_at_ultimate);
  EXPECT_EQ(s.angles.size(), 2u);
}

TEST(Summaries, InvalidTrialSkippedWithWarning) {
  auto bad = synthetic("v", 30, 9.0, true);
  bad.valid = false;
  bad.issue = "positive relative pressure";
  const std::vector<TrialRecord> trials{synthetic("v", 30, 0.5, true), bad};
  const auto s = summarize_scenario(trials);
  EXPECT_EQ(s.warnings.size(), 1u);
  EXPECT_EQ(*s.force_at_ultimate, 0.5);
}

TEST(Summaries, Errors) {
  EXPECT_THROW(summarize_scenario(std::vector<TrialRecord>{}), Error);
  const std::vector<TrialRecord> mixed{synthetic("a", 15, 1, true), synthetic("b", 15, 1, true)};
  EXPECT_THROW(summarize_scenario(mixed), Error);
  TrialRecord no_angle = synthetic("a", 15, 1, true);
  no_angle.surface_angle.reset();
  EXPECT_THROW(summarize_scenario(std::vector<TrialRecord>{no_angle}), Error);
}

TEST(CompareTheory, IdenticalGivesZeroResiduals) {
  const std::vector<TrialRecord> trials{synthetic("c", 15, 0.3, true), synthetic("c", 30, 0.48, true)};
  const auto s = summarize_scenario(trials);
  const std::vector<AdaptationPrediction> p{{radians(15), 0.4, 0.3}, {radians(30), 0.8, 0.48}};
  const auto rep = compare_theory(s, p);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.absolute_residual, 0.0);
  EXPECT_EQ(*rep.mean_abs_relative_error, 0.0);
}

TEST(CompareTheory, RelativeResidual) {
  const std::vector<TrialRecord> trials{synthetic("c", 45, 0.48, true)};
  const std::vector<AdaptationPrediction> p{{radians(45), 1.03, 1.40}};
  const auto rep = compare_theory(summarize_scenario(trials), p);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_NEAR(*rep.rows[0].relative_residual, (1.40 - 0.48) / 0.48, 1e-12);
  EXPECT_NEAR(*rep.rows[0].relative_residual, 1.9167, 1e-4);
  EXPECT_NEAR(rep.rows[0].absolute_residual, 0.92, 1e-12);
}

TEST(CompareTheory, EmptyAndMissing) {
  const std::vector<TrialRecord> none{synthetic("c", 15, 0.3, false)};
  const auto rep = compare_theory(summarize_scenario(none), {});
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_FALSE(rep.mean_abs_relative_error);

  const std::vector<TrialRecord> one{synthetic("c", 15, 0.3, true)};
  try {
    compare_theory(summarize_scenario(one), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Coverage);
  }
}

TEST(Manifest, ParseErrors) {
  std::istringstream bad("file,scenario,angle_deg\na.csv,x,fifteen\n");
  EXPECT_THROW(parse_manifest(bad, "."), ParseError);
  std::istringstream ok("file,scenario,angle_deg\n/abs/a.csv,x,15\nb.csv,y,30\n");
  const auto e = parse_manifest(ok, "/base");
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].file, std::filesystem::path("/abs/a.csv"));
  EXPECT_EQ(e[1].file, std::filesystem::path("/base/b.csv"));
  EXPECT_THROW(load_trial(kFixtures / "does_not_exist.csv", "x"), Error);
}

TEST(Properties, SerializeParseIsBitExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TrialRecord r;
  double t = 0.0;
  for (int i = 0; i < 500; ++i) {
    t += 0.01 + std::abs(u(rng));
    r.samples.push_back({t, 5.0 * u(rng), std::ldexp(u(rng), static_cast<int>(rng() % 40) - 30), -70.0 * std::abs(u(rng))});
  }
  r.samples.push_back({t + 1.0, 0.0, 0.0, -0.0});
  std::ostringstream out;
  serialize_trial(r, out);
  std::istringstream in(out.str());
  const auto back = parse_trial(in, "s");
  ASSERT_EQ(back.samples.size(), r.samples.size());
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].time, r.samples[i].time);
    EXPECT_EQ(back.samples[i].force, r.samples[i].force);
    EXPECT_EQ(back.samples[i].displacement, r.samples[i].displacement) << i;
    EXPECT_EQ(back.samples[i].pressure, r.samples[i].pressure);
  }
  // And the text is a fixed point.
  std::ostringstream again;
  serialize_trial(back, again);
  EXPECT_EQ(again.str(), out.str());
}

TEST(Properties, DeeperThresholdAttachesNoEarlier) {
  const auto r = ramp_trial();
  std::size_t prev = 0;
  for (double th = -10.0; th >= -60.0; th -= 2.5) {
    const auto e = detect_attachment(r, th);
    ASSERT_TRUE(e) << th;
    EXPECT_GE(e->sample_index, prev);
    prev = e->sample_index;
  }
  EXPECT_FALSE(detect_attachment(r, -61.0));
}

TEST(Properties, AppendingAfterAttachmentChangesNothing) {
  auto r = synthetic("a", 30, 0.48, true);
  const double before = adaptation_force(r, *detect_attachment(r));
  const auto index = detect_attachment(r)->sample_index;
  for (int i = 0; i < 10; ++i) r.samples.push_back({r.samples.back().time + 0.1, 50.0, 0.0, -60.0});
  EXPECT_EQ(detect_attachment(r)->sample_index, index);
  EXPECT_EQ(adaptation_force(r, *detect_attachment(r)), before);
}

TEST(Properties, SummaryIgnoresTrialOrder) {
  auto trials = manifest_scenario("10mm Granular");
  const auto ref = summarize_scenario(trials);
  std::mt19937 rng(99);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(trials.begin(), trials.end(), rng);
    const auto s = summarize_scenario(trials);
    EXPECT_EQ(s.ultimate_angle, ref.ultimate_angle);
    EXPECT_EQ(s.force_at_ultimate, ref.force_at_ultimate);
    ASSERT_EQ(s.angles.size(), ref.angles.size());
    for (std::size_t i = 0; i < s.angles.size(); ++i) EXPECT_EQ(s.angles[i].adaptation_force, ref.angles[i].adaptation_force);
  }
}
