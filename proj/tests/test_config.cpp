#include <sstream>

#include <gtest/gtest.h>

#include "kicksim/experiment.hpp"

using namespace kicksim;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string offending_key(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse("");
  EXPECT_EQ(c.experiment, ExperimentKind::two_slit);
  EXPECT_EQ(c.n, 2u);
  EXPECT_DOUBLE_EQ(c.sigma, 0.05);
  EXPECT_DOUBLE_EQ(c.t, 40.0 / (2.0 * kPi));
  EXPECT_EQ(c.samples, 0u);
}

TEST(Config, DerivedDefaultsFollowD) {
  const auto c = parse("d = 2\n");
  EXPECT_DOUBLE_EQ(c.sigma, 0.1);
  EXPECT_DOUBLE_EQ(c.t, 160.0 / (2.0 * kPi));
}

TEST(Config, DefaultsTextRoundTrips) {
  const auto c = parse(defaults_text());
  EXPECT_EQ(c.experiment, ExperimentKind::two_slit);
  EXPECT_DOUBLE_EQ(c.sigma, 0.05);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_EQ(offending_key("colour = red\n"), "colour");
  EXPECT_EQ(offending_key("d = -1\n"), "d");
  EXPECT_EQ(offending_key("d = one\n"), "d");
  EXPECT_EQ(offending_key("sigma = 0.3\n"), "sigma");
  EXPECT_EQ(offending_key("basis = rainbow\n"), "basis");
  EXPECT_EQ(offending_key("experiment = three_slit\nn = 4\n"), "n");
  EXPECT_EQ(offending_key("experiment = n_slit\nn = 1\n"), "n");
  EXPECT_EQ(offending_key("experiment = three_slit\nbasis = general_two_slit\n"), "basis");
  EXPECT_EQ(offending_key("basis = custom\n"), "matrix");
  EXPECT_EQ(offending_key("basis = custom\nmatrix = 1 1 ; 0 1\n"), "matrix");
  EXPECT_EQ(offending_key("matrix = 1 0 ; 0 1\n"), "matrix");
  EXPECT_EQ(offending_key("grid_points = 1000\n"), "grid_points");
  EXPECT_EQ(offending_key("t = -1\n"), "t");
  EXPECT_EQ(offending_key("samples = 2.5\n"), "samples");
  EXPECT_EQ(offending_key("experiment = momentum_space\np1 = 2\np2 = 1\n"), "p2");
  EXPECT_EQ(offending_key("experiment = momentum_space\nwidth = 0.5\n"), "width");
  EXPECT_EQ(offending_key("[section]\nd = 1\n"), "section");
  EXPECT_EQ(offending_key("d = 1\nd = 2\n"), "<syntax>");
}

TEST(Config, CustomMatrix) {
  const auto c = parse("basis = custom\nmatrix = 0.6 0.8 ; 0.8 -0.6\nmatrix_imag = 0 0 ; 0 0\n");
  EXPECT_NEAR(std::abs(c.matrix(1, 1) + 0.6), 0.0, 1e-15);
}

TEST(Experiment, TwoSlitReport) {
  auto c = parse("samples = 2000\nseed = 4\n");
  const auto r = run_experiment(c);
  EXPECT_EQ(r.report["schema_version"], kReportSchemaVersion);
  EXPECT_EQ(r.report["kick_form"]["kind"], "lattice_kicks");
  EXPECT_NEAR(r.report["conditioned"]["shift_vs_outcome_0"][1].get<double>(), 0.5, 1e-3);
  EXPECT_LT(r.report["unconditioned"]["visibility"].get<double>(), 1e-3);
  ASSERT_TRUE(r.samples_csv.has_value());
  EXPECT_EQ(r.samples_csv->substr(0, 16), "index,outcome,x\n");
  EXPECT_EQ(r.patterns_csv.substr(0, 44), "x,unconditioned,conditioned_0,conditioned_1\n");
  // One header plus one row per screen point.
  EXPECT_EQ(std::count(r.patterns_csv.begin(), r.patterns_csv.end(), '\n'), 4097);
}

TEST(Experiment, ThreeSlitCenteredShifts) {
  const auto r = run_experiment(parse("experiment = three_slit\norigin = centered\n"));
  EXPECT_EQ(r.report["basis"]["tag"], "three-slit-centered");
  const auto& s = r.report["conditioned"]["shift_vs_outcome_0"];
  EXPECT_LT(circular_distance(s[1].get<double>(), 1.0 / 3.0), 1e-3);
  EXPECT_LT(circular_distance(s[2].get<double>(), -1.0 / 3.0), 1e-3);
}

TEST(Experiment, Deterministic) {
  const auto c = parse("experiment = n_slit\nn = 4\nsamples = 5000\n");
  set_threads(1);
  const auto a = run_experiment(c);
  set_threads(3);
  const auto b = run_experiment(c);
  set_threads(1);
  EXPECT_EQ(a.patterns_csv, b.patterns_csv);
  EXPECT_EQ(a.report.dump(), b.report.dump());
  EXPECT_EQ(*a.samples_csv, *b.samples_csv);
}

TEST(Experiment, GuardsPropagate) {
  try {
    run_experiment(parse("sigma = 0.25\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OverlapTooLarge);
    EXPECT_TRUE(e.is_numerical_guard());
  }
  try {
    run_experiment(parse("t = 0.1\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFarField);
  }
}

TEST(Report, TwelveSignificantDigits) {
  EXPECT_EQ(round12(kPi), 3.14159265359);
  EXPECT_EQ(num(std::nan("")), nullptr);
  EXPECT_EQ(fmt12(1.0 / 3.0), "0.333333333333");
}
