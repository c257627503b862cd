#include <gtest/gtest.h>

#include "kicksim/patterns.hpp"
#include "kicksim/pspace.hpp"

using namespace kicksim;

namespace {

MomentumPeaks peaks(double p1, double p2, double width) {
  return {p1, p2, width, default_momentum_grid(p1, p2, width)};
}

}  // namespace

TEST(PositionKick, Value) {
  EXPECT_DOUBLE_EQ(position_kick_value(0.0, 2.0 * kPi), 0.5);
  EXPECT_DOUBLE_EQ(position_kick_value(1.0, 3.0), kPi / 2.0);
  try {
    position_kick_value(1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateMomenta);
  }
}

TEST(Peaks, Validation) {
  EXPECT_THROW(peaks(1.0, 1.0, 0.01).validate(), Error);
  EXPECT_THROW((MomentumPeaks{0.0, 1.0, 0.2, default_momentum_grid(0.0, 1.0, 0.1)}.validate()), Error);
  EXPECT_NO_THROW(peaks(0.0, 1.0, 1.0 / 8.0).validate());
  // The widest accepted peaks still overlap by exp(-16), above the orthogonality guard.
  try {
    make_momentum_peaks(peaks(0.0, 1.0, 1.0 / 8.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OverlapTooLarge);
  }
  const auto p = make_momentum_peaks(peaks(0.0, 1.0, 0.05));
  EXPECT_NEAR(p[0].norm2(), 1.0, 1e-12);
  EXPECT_EQ(p[0].space, Space::momentum);
}

TEST(PositionKick, FidelityClosedForm) {
  for (double p2 : {1.0, 2.0 * kPi}) {
    for (double frac : {1.0 / 20.0, 1.0 / 100.0}) {
      const auto pk = peaks(0.0, p2, p2 * frac);
      const auto st = change_basis(entangle(make_momentum_peaks(pk)), fourier_basis(2));
      const auto r = position_kick_representation(st, pk);
      const double x0 = kPi / p2, w = p2 * frac;
      EXPECT_NEAR(r.x0, x0, 1e-15);
      EXPECT_NEAR(r.fidelity.global, 0.5 * (1.0 + std::exp(-x0 * x0 * w * w / 4.0)), 1e-9);
      EXPECT_NEAR(r.fidelity.global, gaussian_position_kick_fidelity(0.0, p2, w), 1e-9);
    }
  }
}

TEST(PositionKick, MinusOutcomeIsPlusShiftedByMinusX0) {
  const double p1 = 0.5, p2 = 0.5 + 2.0 * kPi;
  const auto pk = peaks(p1, p2, (p2 - p1) / 20.0);
  const auto st = change_basis(entangle(make_momentum_peaks(pk)), fourier_basis(2));
  const auto r = position_kick_representation(st, pk);
  const Grid screen = default_position_screen(pk.width, 1024);
  Grid moved = screen;
  moved.x_min += r.x0;
  moved.x_max += r.x0;
  const auto kicked = pattern_of(to_position(r.kicked.components[1], screen));
  const auto plus_moved = pattern_of(to_position(r.kicked.components[0], moved));
  double worst = 0.0;
  for (std::size_t i = 0; i < screen.n_points; ++i)
    worst = std::max(worst, std::abs(kicked.intensity[i] - plus_moved.intensity[i]));
  EXPECT_LT(worst, 1e-12 * kicked.max());
}

TEST(PositionKick, ConstantPhaseDoesNotChangePatterns) {
  const auto pk = peaks(1.0, 3.0, 0.1);
  const auto st = change_basis(entangle(make_momentum_peaks(pk)), fourier_basis(2));
  const auto r = position_kick_representation(st, pk);
  const Grid screen = default_position_screen(pk.width, 1024);
  const auto with = pattern_of(to_position(r.kicked.components[1], screen));
  const auto without =
      pattern_of(to_position(plane_wave_factor(r.kicked.components[0], r.x0, 0.0), screen));
  EXPECT_LT(max_abs_diff(with, without), 1e-12 * with.max());
}

TEST(PositionKick, ConditionedFringesShiftByHalfPeriod) {
  const auto pk = peaks(0.0, 2.0 * kPi, 2.0 * kPi / 20.0);
  const auto st = change_basis(entangle(make_momentum_peaks(pk)), fourier_basis(2));
  const Grid screen = default_position_screen(pk.width);
  const auto plus = pattern_of(to_position(st.components[0], screen));
  const auto minus = pattern_of(to_position(st.components[1], screen));
  const auto r = fringe_report(minus, plus);
  ASSERT_TRUE(r.period && r.shift);
  EXPECT_NEAR(*r.period, 1.0, 1e-3);
  EXPECT_LT(circular_distance(*r.shift, 0.5), 1e-3);
}

TEST(Duality, MatchesPositionPipeline) {
  for (double s : {0.05, 0.02}) {
    const auto r = duality_check(1.0, s);
    EXPECT_LT(r.difference, 1e-9);
    EXPECT_NEAR(r.position_fidelity, 0.5 * (1.0 + std::exp(-kPi * kPi * s * s / 4.0)), 1e-9);
  }
}
