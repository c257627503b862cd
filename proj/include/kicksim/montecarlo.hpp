#pragma once

// Particle-by-particle sampling: detector outcome first, then a screen
// position from that outcome's conditioned pattern.

#include <cstdint>

#include <boost/math/distributions/chi_squared.hpp>

#include "kicksim/core.hpp"
#include "kicksim/patterns.hpp"
#include "kicksim/qstate.hpp"

namespace kicksim {

/// Counter-based generator: the draw for (seed, counter) is a SplitMix64
/// hash, so every sample index owns its random numbers no matter which worker
/// produces it.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t counter) const { return mix(mix(seed) ^ (counter * 0xD1B54A32D192ED03ULL)); }

  /// Uniform double in [0, 1).
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
};

struct SampleRecord {
  std::size_t outcome = 0;
  double x = 0.0;
  bool operator==(const SampleRecord&) const = default;
};

struct SampleRun {
  std::string basis_tag;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  Grid grid;
  std::vector<SampleRecord> records;
  std::vector<std::uint64_t> histogram;  // one bin per grid cell [x_i, x_{i+1})

  std::vector<std::uint64_t> outcome_counts(std::size_t n_outcomes) const {
    std::vector<std::uint64_t> c(n_outcomes, 0);
    for (const auto& r : records) ++c.at(r.outcome);
    return c;
  }
};

inline std::size_t bin_of(const Grid& g, double x) {
  const auto cells = g.n_points - 1;
  const double f = (x - g.x_min) / g.spacing();
  if (f <= 0.0) return 0;
  return std::min(cells - 1, static_cast<std::size_t>(f));
}

inline std::vector<std::uint64_t> histogram_of(const Grid& g, const std::vector<SampleRecord>& records,
                                               std::optional<std::size_t> outcome = std::nullopt) {
  std::vector<std::uint64_t> h(g.n_points - 1, 0);
  for (const auto& r : records)
    if (!outcome || r.outcome == *outcome) ++h[bin_of(g, r.x)];
  return h;
}

namespace detail {

// Cumulative trapezoid masses of a pattern over its grid cells.
inline std::vector<double> cell_cdf(const std::vector<double>& intensity) {
  std::vector<double> cdf(intensity.size(), 0.0);
  for (std::size_t i = 1; i < intensity.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * (intensity[i - 1] + intensity[i]);
  return cdf;
}

}  // namespace detail

/// Draws n_samples (outcome, position) pairs from a state at the screen.
/// Outcome j has probability |c_j|^2; the position is sampled by inverse CDF
/// over the conditioned pattern, linear within each grid cell.
inline SampleRun sample(const EntangledState& state, std::size_t n_samples, std::uint64_t seed) {
  if (state.components.empty()) throw Error(Errc::EmptyState, "no components to sample");
  require_shared_grid(state);
  const double total = state.total_norm2();
  if (!(total > 0.0)) throw Error(Errc::EmptyState, "state has zero norm");

  const std::size_t n = state.dim();
  const Grid grid = state.grid();
  std::vector<double> outcome_cdf(n);
  std::vector<std::vector<double>> cdfs;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    acc += state.components[j].norm2() / total;
    outcome_cdf[j] = acc;
    cdfs.push_back(detail::cell_cdf(conditioned_pattern(state, j).intensity));
  }

  SampleRun run{state.basis_tag, n_samples, seed, grid, std::vector<SampleRecord>(n_samples), {}};
  const CounterRng rng{seed};
  const double dx = grid.spacing();
  parallel_for(n_samples, [&](std::size_t i) {
    const double u_outcome = rng.uniform(2 * static_cast<std::uint64_t>(i));
    const double u_position = rng.uniform(2 * static_cast<std::uint64_t>(i) + 1);
    std::size_t j = static_cast<std::size_t>(
        std::upper_bound(outcome_cdf.begin(), outcome_cdf.end(), u_outcome * outcome_cdf.back()) -
        outcome_cdf.begin());
    j = std::min(j, n - 1);
    const auto& cdf = cdfs[j];
    const double target = u_position * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t cell = it == cdf.begin() ? 0 : static_cast<std::size_t>(it - cdf.begin()) - 1;
    cell = std::min(cell, cdf.size() - 2);
    const double mass = cdf[cell + 1] - cdf[cell];
    const double frac = mass > 0.0 ? std::clamp((target - cdf[cell]) / mass, 0.0, 1.0) : 0.5;
    run.records[i] = {j, grid.x(cell) + frac * dx};
  });
  run.histogram = histogram_of(grid, run.records);
  return run;
}

inline constexpr double kMonteCarloAlpha = 0.001;
inline constexpr double kKsCoefficient = 1.95;  // c(alpha = 0.001) for the two-sample KS bound

struct RunComparison {
  double chi2 = 0.0;
  std::size_t dof = 0;
  double chi2_critical = 0.0;
  double chi2_p_value = 1.0;
  double ks = 0.0;
  double ks_critical = 0.0;
  bool chi2_pass = false;
  bool ks_pass = false;
  bool pass = false;
};

/// Two-sample KS distance between position samples (outcomes ignored).
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

/// Two-sample chi-squared over histogram bins (adjacent bins merged until the
/// expected count of each run is >= 5) plus KS distance on positions.
inline RunComparison compare_runs(const SampleRun& a, const SampleRun& b, double alpha = kMonteCarloAlpha) {
  if (!(a.grid == b.grid) || a.histogram.size() != b.histogram.size())
    throw Error(Errc::IncompatibleGrids, "runs were binned on different screen grids");
  RunComparison r;
  const double na = static_cast<double>(a.records.size());
  const double nb = static_cast<double>(b.records.size());
  if (na == 0.0 || nb == 0.0) throw Error(Errc::EmptyState, "cannot compare empty runs");

  // Merge bins.
  std::vector<std::pair<double, double>> merged;
  double ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < a.histogram.size(); ++i) {
    ra += static_cast<double>(a.histogram[i]);
    rb += static_cast<double>(b.histogram[i]);
    const double pooled = ra + rb;
    if (pooled * na / (na + nb) >= 5.0 && pooled * nb / (na + nb) >= 5.0) {
      merged.emplace_back(ra, rb);
      ra = rb = 0.0;
    }
  }
  if (ra + rb > 0.0) {
    if (merged.empty()) merged.emplace_back(ra, rb);
    else { merged.back().first += ra; merged.back().second += rb; }
  }

  const double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
  for (const auto& [x, y] : merged) {
    if (x + y == 0.0) continue;
    const double diff = k1 * x - k2 * y;
    r.chi2 += diff * diff / (x + y);
  }
  r.dof = merged.size() > 1 ? merged.size() - 1 : 1;
  const boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.chi2_critical = boost::math::quantile(boost::math::complement(dist, alpha));
  r.chi2_p_value = boost::math::cdf(boost::math::complement(dist, r.chi2));
  r.chi2_pass = r.chi2 <= r.chi2_critical;

  std::vector<double> xa, xb;
  xa.reserve(a.records.size());
  xb.reserve(b.records.size());
  for (const auto& rec : a.records) xa.push_back(rec.x);
  for (const auto& rec : b.records) xb.push_back(rec.x);
  r.ks = ks_distance(std::move(xa), std::move(xb));
  r.ks_critical = kKsCoefficient * std::sqrt((na + nb) / (na * nb));
  r.ks_pass = r.ks < r.ks_critical;
  r.pass = r.chi2_pass && r.ks_pass;
  return r;
}

/// Three-sigma binomial band for an outcome frequency.
inline double binomial_tolerance(double p, std::size_t n) {
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

}  // namespace kicksim
