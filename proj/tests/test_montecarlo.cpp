#include <numeric>

#include <gtest/gtest.h>

#include "kicksim/montecarlo.hpp"
#include "kicksim/propagate.hpp"

using namespace kicksim;

namespace {

EntangledState screen_state(const DetectorBasis& b, double shift = 0.0) {
  SlitArray s{2, 1.0, 0.05};
  const Grid g = default_grid(s);
  auto states = make_slit_states(s, g);
  if (shift != 0.0)
    for (auto& w : states) w = plane_wave_factor(w, shift);
  PropagationSpec spec{PropagationMode::fraunhofer, default_flight_time(1.0), default_screen_grid(0.05), 1.0};
  return evolve_entangled(change_basis(entangle(states), b), spec);
}

}  // namespace

TEST(Rng, UniformRangeAndIndependence) {
  const CounterRng r{42};
  double mean = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = r.uniform(i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / 100000.0, 0.5, 0.005);
  EXPECT_NE(r.bits(0), (CounterRng{43}.bits(0)));
}

TEST(Sample, DeterministicAcrossThreads) {
  const auto st = screen_state(fourier_basis(2));
  set_threads(1);
  const auto a = sample(st, 20000, 9);
  set_threads(4);
  const auto b = sample(st, 20000, 9);
  set_threads(1);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.histogram, b.histogram);
  EXPECT_NE(a.records, sample(st, 20000, 10).records);
}

TEST(Sample, ZeroSamples) {
  const auto r = sample(screen_state(fourier_basis(2)), 0, 1);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(std::accumulate(r.histogram.begin(), r.histogram.end(), std::uint64_t{0}), 0u);
}

TEST(Sample, OutcomeFrequencies) {
  const std::size_t n = 200000;
  const auto r = sample(screen_state(fourier_basis(2)), n, 3);
  const auto c = r.outcome_counts(2);
  EXPECT_LT(std::abs(static_cast<double>(c[0]) / n - 0.5), binomial_tolerance(0.5, n));
}

TEST(Sample, HistogramConvergesToPattern) {
  // Blocks of 8 cells with an expected count >= 1e4 must sit within 4 standard deviations.
  const std::size_t n = 1000000;
  const auto st = screen_state(fourier_basis(2));
  const auto r = sample(st, n, 11);
  const auto cond = conditioned_pattern(st, 0);
  const auto counts = r.outcome_counts(2);
  const auto h = histogram_of(r.grid, r.records, 0);
  const double dx = r.grid.spacing();
  std::size_t checked = 0;
  for (std::size_t b = 0; b + 8 <= h.size(); b += 8) {
    double mass = 0.0, observed = 0.0;
    for (std::size_t i = b; i < b + 8; ++i) {
      mass += 0.5 * (cond.intensity[i] + cond.intensity[i + 1]) * dx / cond.weight;
      observed += static_cast<double>(h[i]);
    }
    const double expected = mass * static_cast<double>(counts[0]);
    if (expected < 1e4) continue;
    ++checked;
    EXPECT_LT(std::abs(observed - expected), 4.0 * std::sqrt(expected)) << b;
  }
  EXPECT_GT(checked, 10u);
}

TEST(Compare, SelfComparisonIsZero) {
  const auto r = sample(screen_state(fourier_basis(2)), 50000, 5);
  const auto c = compare_runs(r, r);
  EXPECT_EQ(c.chi2, 0.0);
  EXPECT_EQ(c.ks, 0.0);
  EXPECT_TRUE(c.pass);
}

TEST(Compare, EquivalentRunsAgree) {
  // Outcome-blind positions from two different detector bases share one distribution.
  const auto a = sample(screen_state(fourier_basis(2)), 100000, 1);
  const auto b = sample(screen_state(which_way_basis(2)), 100000, 2);
  const auto c = compare_runs(a, b);
  EXPECT_TRUE(c.pass) << c.chi2 << " " << c.chi2_critical << " " << c.ks << " " << c.ks_critical;
}

TEST(Compare, ShiftedDistributionFails) {
  const auto a = sample(screen_state(fourier_basis(2)), 100000, 1);
  const auto b = sample(screen_state(fourier_basis(2), 2.0), 100000, 2);
  const auto c = compare_runs(a, b);
  EXPECT_FALSE(c.pass);
  EXPECT_FALSE(c.ks_pass);
}

TEST(Compare, GridMismatch) {
  auto a = sample(screen_state(fourier_basis(2)), 1000, 1);
  auto b = a;
  b.grid.x_max += 1.0;
  try {
    compare_runs(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IncompatibleGrids);
  }
}

TEST(Compare, KsDistanceOracle) {
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3, 4}, {1, 2, 3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 2}, {3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 3}, {2, 4}), 0.5);
}
