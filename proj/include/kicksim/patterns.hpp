#pragma once

// Screen intensity patterns and fringe analysis.

#include <optional>

#include "kicksim/core.hpp"
#include "kicksim/propagate.hpp"
#include "kicksim/qstate.hpp"

namespace kicksim {

/// Nonnegative intensity on a grid. Patterns carry their probability weight
/// rather than being renormalized, so conditioned patterns add up exactly.
struct Pattern {
  Grid grid;
  std::vector<double> intensity;
  double weight = 0.0;

  double integral() const {
    double s = 0.0;
    for (double v : intensity) s += v;
    return s * grid.spacing();
  }

  double max() const { return *std::max_element(intensity.begin(), intensity.end()); }

  double centroid() const {
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < intensity.size(); ++i) {
      m0 += intensity[i];
      m1 += intensity[i] * grid.x(i);
    }
    return m0 > 0.0 ? m1 / m0 : 0.5 * (grid.x_min + grid.x_max);
  }
};

inline Pattern pattern_of(const WaveFunction& w) {
  Pattern p{w.grid, std::vector<double>(w.amp.size()), 0.0};
  for (std::size_t i = 0; i < w.amp.size(); ++i) p.intensity[i] = std::norm(w.amp[i]);
  p.weight = p.integral();
  return p;
}

/// Marginal particle density sum_k |c_k|^2; the same in every orthonormal detector basis.
inline Pattern intensity(const EntangledState& state) {
  require_shared_grid(state);
  Pattern p{state.grid(), std::vector<double>(state.grid().n_points, 0.0), 0.0};
  for (const auto& c : state.components)
    for (std::size_t i = 0; i < c.amp.size(); ++i) p.intensity[i] += std::norm(c.amp[i]);
  p.weight = p.integral();
  return p;
}

/// |c_j|^2, weighted by the probability of outcome j.
inline Pattern conditioned_pattern(const EntangledState& state, std::size_t j) {
  if (j >= state.dim()) throw Error(Errc::IndexOutOfRange, "outcome index " + std::to_string(j));
  return pattern_of(state.components[j]);
}

inline Pattern sum_patterns(const std::vector<Pattern>& parts) {
  if (parts.empty()) throw Error(Errc::EmptyState, "no patterns to sum");
  Pattern out{parts[0].grid, std::vector<double>(parts[0].intensity.size(), 0.0), 0.0};
  for (const auto& p : parts) {
    if (!(p.grid == out.grid)) throw Error(Errc::GridMismatch, "patterns on different grids");
    for (std::size_t i = 0; i < p.intensity.size(); ++i) out.intensity[i] += p.intensity[i];
    out.weight += p.weight;
  }
  return out;
}

inline Pattern scaled(const Pattern& p, double factor) {
  Pattern out = p;
  for (auto& v : out.intensity) v *= factor;
  out.weight *= factor;
  return out;
}

inline double max_abs_diff(const Pattern& a, const Pattern& b) {
  if (!(a.grid == b.grid)) throw Error(Errc::GridMismatch, "patterns on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.intensity.size(); ++i) m = std::max(m, std::abs(a.intensity[i] - b.intensity[i]));
  return m;
}

// ---------------------------------------------------------------------------
// Fringe analysis

struct FringeReport {
  bool fringes_detected = false;
  double visibility = 0.0;
  std::optional<double> period;  // in grid units (screen momentum for far-field patterns)
  std::optional<double> shift;   // fraction of a period, in (-1/2, 1/2]
  double window_lo = 0.0;
  double window_hi = 0.0;
};

struct FringeOptions {
  // Used when the pattern itself shows no detectable fringes (e.g. a washed-out sum).
  std::optional<double> expected_period;
  double window_periods = 6.0;
  // Non-central autocorrelation peaks below this fraction of the zero-lag value count as noise.
  double detection_floor = 1e-4;
};

namespace detail {

// Moving average over a box `width` samples wide (fractional edges).
inline std::vector<double> box_filter(const std::vector<double>& v, double width) {
  const double h = 0.5 * width;
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(h + 0.5));
  std::vector<double> weights(static_cast<std::size_t>(reach) + 1, 0.0);
  for (std::ptrdiff_t j = 0; j <= reach; ++j) {
    const double lo = static_cast<double>(j) - 0.5;
    weights[static_cast<std::size_t>(j)] =
        j == 0 ? std::min(1.0, 2.0 * h) : std::clamp(h - lo, 0.0, 1.0);
  }
  double wsum = weights[0];
  for (std::size_t j = 1; j < weights.size(); ++j) wsum += 2.0 * weights[j];

  const auto n = static_cast<std::ptrdiff_t>(v.size());
  std::vector<double> out(v.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = weights[0] * v[static_cast<std::size_t>(i)];
    for (std::ptrdiff_t j = 1; j <= reach; ++j) {
      const double wj = weights[static_cast<std::size_t>(j)];
      if (wj == 0.0) continue;
      if (i - j >= 0) acc += wj * v[static_cast<std::size_t>(i - j)];
      if (i + j < n) acc += wj * v[static_cast<std::size_t>(i + j)];
    }
    out[static_cast<std::size_t>(i)] = acc / wsum;
  }
  return out;
}

inline std::vector<double> box3(const std::vector<double>& v, double width) {
  return box_filter(box_filter(box_filter(v, width), width), width);
}

}  // namespace detail

/// Slowly varying envelope of a fringe pattern with known period.
/// Three box passes one period wide remove the periodic part exactly for a
/// locally quadratic envelope; Van Cittert iterations undo the smoothing bias.
inline std::vector<double> fringe_envelope(const Pattern& p, double period, int iterations = 8) {
  const double width = period / p.grid.spacing();
  const std::vector<double> smooth = detail::box3(p.intensity, width);
  std::vector<double> env = smooth;
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> reblurred = detail::box3(env, width);
    for (std::size_t i = 0; i < env.size(); ++i) env[i] += smooth[i] - reblurred[i];
  }
  return env;
}

/// Dominant fringe period: position of the strongest non-central peak of the
/// pattern's Fourier transform (its autocorrelation lag).
inline std::optional<double> detect_period(const Pattern& p, double floor = 1e-4) {
  const std::size_t n = p.intensity.size();
  const std::size_t padded = 4 * n;
  std::vector<cplx> buf(padded, cplx{});
  for (std::size_t i = 0; i < n; ++i) buf[i] = p.intensity[i];
  detail::fft_in_place(buf, FFTW_FORWARD);

  const std::size_t half = padded / 2;
  std::vector<double> mag(half);
  for (std::size_t m = 0; m < half; ++m) mag[m] = std::abs(buf[m]);
  const double zero_lag = mag[0];
  if (!(zero_lag > 0.0)) return std::nullopt;

  std::size_t m = 1;
  while (m < half && mag[m] >= floor * zero_lag) ++m;
  std::size_t best = 0;
  for (std::size_t k = m; k + 1 < half; ++k)
    if (best == 0 || mag[k] > mag[best]) best = k;
  if (best == 0 || best + 1 >= half || mag[best] < floor * zero_lag) return std::nullopt;

  // Log-parabolic refinement (exact for Gaussian-shaped peaks).
  const double a = std::log(mag[best - 1]);
  const double b = std::log(mag[best]);
  const double c = std::log(mag[best + 1]);
  const double denom = a - 2.0 * b + c;
  const double offset = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  const double lag_step = 2.0 * kPi / (static_cast<double>(padded) * p.grid.spacing());
  const double lag = (static_cast<double>(best) + offset) * lag_step;
  return 2.0 * kPi / lag;
}

namespace detail {

struct Window {
  std::size_t lo = 0, hi = 0;  // inclusive sample range
};

inline Window window_around(const Grid& g, double center, double half_width) {
  const double dx = g.spacing();
  const double a = std::max(g.x_min, center - half_width);
  const double b = std::min(g.x_max, center + half_width);
  Window w;
  w.lo = static_cast<std::size_t>(std::ceil((a - g.x_min) / dx - 1e-9));
  w.hi = static_cast<std::size_t>(std::floor((b - g.x_min) / dx + 1e-9));
  w.hi = std::min(w.hi, g.n_points - 1);
  return w;
}

inline std::vector<double> normalized_fringes(const Pattern& p, double period, const Window& w) {
  const std::vector<double> env = fringe_envelope(p, period);
  std::vector<double> out;
  out.reserve(w.hi - w.lo + 1);
  for (std::size_t i = w.lo; i <= w.hi; ++i) out.push_back(env[i] > 0.0 ? p.intensity[i] / env[i] : 0.0);
  return out;
}

// Hann-weighted Fourier coefficient of samples over the window at wavenumber k.
inline cplx demodulate(const std::vector<double>& v, const Grid& g, const Window& w, double k) {
  cplx acc{};
  const double len = static_cast<double>(w.hi - w.lo);
  for (std::size_t i = w.lo; i <= w.hi; ++i) {
    const double s = std::sin(kPi * static_cast<double>(i - w.lo) / len);
    acc += v[i - w.lo] * s * s * std::polar(1.0, -k * g.x(i));
  }
  return acc;
}

}  // namespace detail

/// Michelson visibility of the envelope-normalized pattern over a window of
/// `window_periods` periods centered on the pattern centroid (the reference's
/// centroid when one is given), plus the fringe shift relative to the reference.
inline FringeReport fringe_report(const Pattern& p, const Pattern* reference = nullptr,
                                  const FringeOptions& opts = {}) {
  if (reference && !(reference->grid == p.grid))
    throw Error(Errc::GridMismatch, "reference pattern on a different grid");

  FringeReport r;
  const std::optional<double> own = detect_period(p, opts.detection_floor);
  std::optional<double> ref_period;
  if (reference) ref_period = detect_period(*reference, opts.detection_floor);
  r.fringes_detected = own.has_value();
  r.period = own;

  std::optional<double> analysis = ref_period ? ref_period : own;
  if (!analysis) analysis = opts.expected_period;
  if (!analysis) return r;  // nothing to measure against: visibility 0, period/shift undefined
  const double period = *analysis;

  const double center = reference ? reference->centroid() : p.centroid();
  const detail::Window w = detail::window_around(p.grid, center, 0.5 * opts.window_periods * period);
  r.window_lo = p.grid.x(w.lo);
  r.window_hi = p.grid.x(w.hi);
  if (w.hi <= w.lo + 2) return r;

  const std::vector<double> norm = detail::normalized_fringes(p, period, w);
  const auto [mn, mx] = std::minmax_element(norm.begin(), norm.end());
  const double denom = *mx + *mn;
  r.visibility = denom > 0.0 ? std::clamp((*mx - *mn) / denom, 0.0, 1.0) : 0.0;

  if (reference) {
    const double k = 2.0 * kPi / period;
    const std::vector<double> ref_norm = detail::normalized_fringes(*reference, period, w);
    const cplx c = detail::demodulate(norm, p.grid, w, k);
    const cplx c_ref = detail::demodulate(ref_norm, p.grid, w, k);
    if (std::abs(c) > 0.0 && std::abs(c_ref) > 0.0) {
      double s = -std::arg(c * std::conj(c_ref)) / (2.0 * kPi);
      if (s <= -0.5) s += 1.0;
      if (s > 0.5) s -= 1.0;
      r.shift = s;
    }
  }
  return r;
}

inline FringeReport fringe_report(const Pattern& p, const Pattern& reference, const FringeOptions& opts = {}) {
  return fringe_report(p, &reference, opts);
}

/// Distance between two fractional shifts on the unit circle.
inline double circular_distance(double a, double b) {
  const double d = std::abs(std::remainder(a - b, 1.0));
  return d;
}

}  // namespace kicksim
