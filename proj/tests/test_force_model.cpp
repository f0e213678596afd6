#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stalkflex/force_model.hpp"

using namespace stalkflex;

namespace {

std::vector<BendingSample> linear_samples(double slope, double max_deflection, int n) {
  std::vector<BendingSample> out;
  for (int i = 1; i <= n; ++i) {
    const double d = max_deflection * i / n;
    out.push_back({d, slope * d});
  }
  return out;
}

}  // namespace

TEST(AlphaToForce, UnitCase) {
  const BeamGeometry g(1.0, 0.5);
  const auto c = make_calibration(1.0, g);
  EXPECT_EQ(alpha_to_force(1.0, c, g), 1.0);
  EXPECT_EQ(alpha_to_force(0.0, c, g), 0.0);
}

TEST(AlphaToForce, StalkScale) {
  const BeamGeometry g(0.02, 0.01);
  const auto c = make_calibration(5.44e-4, g);
  EXPECT_NEAR(alpha_to_force(1.03, c, g), 1.40, 0.01);
  EXPECT_THROW(alpha_to_force(-1.0, c, g), Error);
  EXPECT_THROW(force_to_alpha(-1.0, c, g), Error);
}

TEST(AlphaToForce, RoundTrip) {
  const BeamGeometry g(0.013, 0.004);
  const auto c = make_calibration(7.7e-4, g);
  for (const double a : {0.0, 0.1, 1.03, 4.2}) EXPECT_NEAR(force_to_alpha(alpha_to_force(a, c, g), c, g), a, 1e-12 * (1 + a));
}

TEST(MakeCalibration, RejectsNonPositive) {
  const BeamGeometry g(0.02, 0.01);
  EXPECT_THROW(make_calibration(0.0, g), Error);
  EXPECT_THROW(make_calibration(-1.0, g), Error);
  EXPECT_THROW(make_calibration(NAN, g), Error);
}

TEST(Calibrate, LinearData) {
  // 0.204 N/mm = 204 N/m on a 20 mm stalk.
  const BeamGeometry g(0.02, 0.01);
  const auto s = linear_samples(204.0, 0.004, 10);
  const auto c = calibrate_ei(s, g, "20mm");
  EXPECT_NEAR(c.linear_slope, 204.0, 1e-9);
  EXPECT_NEAR(c.flexural_rigidity, 5.44e-4, 1e-12);
  EXPECT_NEAR(c.fit_quality, 1.0, 1e-12);
  EXPECT_EQ(c.source_label, "20mm");
  EXPECT_EQ(c.stalk_length, 0.02);
  EXPECT_TRUE(c.warnings.empty());
}

TEST(Calibrate, WarnsAtQuarterLength) {
  const BeamGeometry g(0.02, 0.01);
  EXPECT_TRUE(calibrate_ei(linear_samples(204.0, 0.00499, 10), g).warnings.empty());
  EXPECT_EQ(calibrate_ei(linear_samples(204.0, 0.005, 10), g).warnings.size(), 1u);
}

TEST(Calibrate, SinglePointWithOrigin) {
  // 2.74 N at 5 mm on a 10 mm stalk.
  const BeamGeometry g(0.01, 0.005);
  const std::vector<BendingSample> s{{0.0, 0.0}, {0.005, 2.74}};
  const auto c = calibrate_ei(s, g);
  EXPECT_NEAR(c.linear_slope, 548.0, 1e-9);
  EXPECT_NEAR(c.flexural_rigidity, 548.0 * 1e-6 / 3.0, 1e-15);
  // 5 mm is half the stalk: beyond the small-deflection range.
  EXPECT_EQ(c.warnings.size(), 1u);
}

TEST(Calibrate, Errors) {
  const BeamGeometry g(0.02, 0.01);
  const std::vector<BendingSample> one{{0.001, 0.2}};
  const std::vector<BendingSample> zero_deflection{{0.0, 0.0}, {0.0, 0.1}};
  const std::vector<BendingSample> zero_force{{0.001, 0.0}, {0.002, 0.0}};
  const std::vector<BendingSample> negative{{-0.001, 0.1}, {0.002, 0.4}};
  for (const auto* s : {&one, &zero_deflection, &zero_force, &negative}) {
    try {
      calibrate_ei(*s, g);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Calibration);
    }
  }
  EXPECT_THROW(calibrate_ei({}, g), Error);
}

TEST(Calibrate, NoiselessRecovery) {
  const BeamGeometry g(0.02, 0.01);
  const double ei = 6.1e-4;
  const double k = 3.0 * ei / (0.02 * 0.02 * 0.02);
  const auto c = calibrate_ei(linear_samples(k, 0.004, 25), g);
  EXPECT_LE(std::abs(c.flexural_rigidity - ei) / ei, 1e-3);
}

TEST(Calibrate, NoisyRecovery) {
  const BeamGeometry g(0.02, 0.01);
  const double ei = 6.1e-4;
  const double k = 3.0 * ei / (0.02 * 0.02 * 0.02);
  std::mt19937 rng(12345);
  std::normal_distribution<double> noise(0.0, 0.01);
  auto s = linear_samples(k, 0.004, 40);
  for (auto& p : s) p.force *= 1.0 + noise(rng);
  const auto c = calibrate_ei(s, g);
  EXPECT_LE(std::abs(c.flexural_rigidity - ei) / ei, 0.02);
  EXPECT_GT(c.fit_quality, 0.99);
  EXPECT_LT(c.fit_quality, 1.0);
}

TEST(Properties, ForceAndStiffnessScaling) {
  // Doubling every force doubles EI; the same data on a longer stalk scales
  // EI with L^3 and predicted forces with L.
  const auto s = linear_samples(150.0, 0.003, 8);
  auto doubled = s;
  for (auto& p : doubled) p.force *= 2.0;
  const BeamGeometry g(0.02, 0.01), g2(0.04, 0.02);
  const auto c = calibrate_ei(s, g);
  EXPECT_NEAR(calibrate_ei(doubled, g).flexural_rigidity, 2.0 * c.flexural_rigidity, 1e-15);
  const auto c2 = calibrate_ei(s, g2);
  EXPECT_NEAR(c2.flexural_rigidity, 8.0 * c.flexural_rigidity, 1e-14);
  EXPECT_NEAR(alpha_to_force(1.0, c2, g2), 2.0 * alpha_to_force(1.0, c, g), 1e-12);
}

TEST(PredictForce, Curve) {
  const BeamGeometry g(0.02, 0.01);
  const auto c = make_calibration(5.44e-4, g);
  const std::vector<double> angles{radians(45), radians(15), radians(95)};
  const auto rows = predict_force_curve(angles, c, g, {});
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_TRUE(rows[0].prediction);
  EXPECT_NEAR(rows[0].prediction->force, 1.40, 0.05);
  EXPECT_EQ(rows[0].prediction->force, alpha_to_force(rows[0].prediction->alpha, c, g));
  ASSERT_TRUE(rows[1].prediction);
  EXPECT_LT(rows[1].prediction->force, rows[0].prediction->force);
  EXPECT_FALSE(rows[2].prediction);
  EXPECT_FALSE(rows[2].error.empty());
  EXPECT_TRUE(predict_force_curve({}, c, g, {}).empty());
}

TEST(PredictForce, ZeroAngleZeroForce) {
  const BeamGeometry g(0.02, 0.01);
  const std::vector<double> angles{0.0};
  const auto rows = predict_force_curve(angles, make_calibration(1e-3, g), g, {});
  ASSERT_TRUE(rows[0].prediction);
  EXPECT_EQ(rows[0].prediction->force, 0.0);
}
