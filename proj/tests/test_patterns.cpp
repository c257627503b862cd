#include <gtest/gtest.h>

#include "kicksim/patterns.hpp"
#include "kicksim/propagate.hpp"
#include "kicksim/ubasis.hpp"

using namespace kicksim;

namespace {

Pattern synthetic(double visibility, double period, double shift, double width = 20.0) {
  const Grid g{-100.0, 100.0, 8192};
  Pattern p{g, std::vector<double>(g.n_points), 0.0};
  for (std::size_t i = 0; i < g.n_points; ++i) {
    const double x = g.x(i);
    p.intensity[i] = std::exp(-x * x / (2.0 * width * width)) *
                     (1.0 + visibility * std::cos(2.0 * kPi * (x / period - shift)));
  }
  p.weight = p.integral();
  return p;
}

struct Screen {
  EntangledState which_way;
  PropagationSpec spec;
  Screen() {
    SlitArray s{2, 1.0, 0.05};
    which_way = entangle(make_slit_states(s, default_grid(s)));
    spec = {PropagationMode::fraunhofer, default_flight_time(1.0), default_screen_grid(0.05), 1.0};
  }
};

}  // namespace

TEST(Fringes, SyntheticVisibilityPeriodShift) {
  for (double v : {1.0, 0.6, 0.25}) {
    for (double shift : {0.0, 0.2, -0.35}) {
      const auto ref = synthetic(1.0, 5.0, 0.0);
      const auto r = fringe_report(synthetic(v, 5.0, shift), ref);
      ASSERT_TRUE(r.period.has_value());
      EXPECT_NEAR(*r.period, 5.0, 1e-3);
      EXPECT_NEAR(r.visibility, v, 2e-3) << v << " " << shift;
      ASSERT_TRUE(r.shift.has_value());
      EXPECT_LT(circular_distance(*r.shift, shift), 1e-3) << v << " " << shift;
    }
  }
}

TEST(Fringes, FlatPatternHasNone) {
  const auto r = fringe_report(synthetic(0.0, 5.0, 0.0));
  EXPECT_FALSE(r.fringes_detected);
  EXPECT_EQ(r.visibility, 0.0);
  FringeOptions o;
  o.expected_period = 5.0;
  EXPECT_LT(fringe_report(synthetic(0.0, 5.0, 0.0), nullptr, o).visibility, 1e-6);
}

TEST(Fringes, CircularDistance) {
  EXPECT_NEAR(circular_distance(0.45, -0.45), 0.1, 1e-15);
  EXPECT_NEAR(circular_distance(0.2, 0.2), 0.0, 1e-15);
}

TEST(Patterns, MarginalIsBasisIndependent) {
  Screen s;
  const auto ww = evolve_entangled(s.which_way, s.spec);
  const auto base = intensity(ww);
  for (const auto& b : {fourier_basis(2), general_two_slit_basis(0.4, -1.0, 2.0), rotation_basis(0.3)}) {
    const auto other = intensity(evolve_entangled(change_basis(s.which_way, b), s.spec));
    EXPECT_LT(max_abs_diff(base, other), 1e-12 * base.max());
  }
}

TEST(Patterns, ConditionedSumToMarginal) {
  Screen s;
  const auto st = evolve_entangled(change_basis(s.which_way, fourier_basis(2)), s.spec);
  const auto sum = sum_patterns({conditioned_pattern(st, 0), conditioned_pattern(st, 1)});
  EXPECT_LT(max_abs_diff(sum, intensity(st)), 1e-15);
  EXPECT_NEAR(sum.weight, 1.0, 1e-9);
}

TEST(Patterns, EraserComplementaryFringes) {
  Screen s;
  const auto st = evolve_entangled(change_basis(s.which_way, fourier_basis(2)), s.spec);
  const auto plus = conditioned_pattern(st, 0), minus = conditioned_pattern(st, 1);
  const auto rp = fringe_report(plus), rm = fringe_report(minus, plus);
  EXPECT_GT(rp.visibility, 0.99);
  EXPECT_GT(rm.visibility, 0.99);
  ASSERT_TRUE(rm.shift.has_value());
  EXPECT_LT(circular_distance(*rm.shift, 0.5), 1e-3);
  ASSERT_TRUE(rp.period.has_value());
  EXPECT_NEAR(*rp.period, 2.0 * kPi, 1e-3);
}

TEST(Patterns, WhichWayHasNoFringes) {
  Screen s;
  const auto st = evolve_entangled(s.which_way, s.spec);
  FringeOptions o;
  o.expected_period = 2.0 * kPi;
  EXPECT_LT(fringe_report(intensity(st), nullptr, o).visibility, 1e-3);
}

TEST(Patterns, GridMismatch) {
  const auto a = synthetic(1.0, 5.0, 0.0);
  Pattern b = a;
  b.grid.x_max = 101.0;
  EXPECT_THROW(max_abs_diff(a, b), Error);
  EXPECT_THROW(sum_patterns({a, b}), Error);
  EXPECT_THROW(fringe_report(a, b), Error);
}
