#pragma once

// Shared numerical plumbing: error type, grids, wavefunctions, threading.
// Units throughout: hbar = 1, m = 1, so h = 2*pi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kicksim {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kPlanck = 2.0 * kPi;  // h in hbar = 1 units
inline constexpr cplx kI{0.0, 1.0};

enum class Errc {
  InvalidArgument,
  InvalidDimension,
  IndexOutOfRange,
  GridMismatch,
  DimensionMismatch,
  NotUnitary,
  NotUnbiased,
  DegenerateMomenta,
  EmptyState,
  IncompatibleGrids,
  // Numerical guards. These map to exit code 3 in the CLI.
  GridTooCoarse,
  OverlapTooLarge,
  AliasingDetected,
  NotFarField,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidDimension: return "InvalidDimension";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NotUnitary: return "NotUnitary";
    case Errc::NotUnbiased: return "NotUnbiased";
    case Errc::DegenerateMomenta: return "DegenerateMomenta";
    case Errc::EmptyState: return "EmptyState";
    case Errc::IncompatibleGrids: return "IncompatibleGrids";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::OverlapTooLarge: return "OverlapTooLarge";
    case Errc::AliasingDetected: return "AliasingDetected";
    case Errc::NotFarField: return "NotFarField";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  bool is_numerical_guard() const noexcept {
    return code_ == Errc::GridTooCoarse || code_ == Errc::OverlapTooLarge ||
           code_ == Errc::AliasingDetected || code_ == Errc::NotFarField;
  }

 private:
  Errc code_;
};

inline bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

/// Uniform 1-D sampling of [x_min, x_max] with both endpoints included.
struct Grid {
  double x_min = 0.0;
  double x_max = 1.0;
  std::size_t n_points = 2;

  double spacing() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  double x(std::size_t i) const { return x_min + spacing() * static_cast<double>(i); }
  double span() const { return x_max - x_min; }

  void validate() const {
    if (!is_power_of_two(n_points))
      throw Error(Errc::InvalidArgument, "grid n_points must be a power of two");
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
      throw Error(Errc::InvalidArgument, "grid bounds must be finite with x_max > x_min");
  }

  bool operator==(const Grid&) const = default;
};

enum class Space { position, momentum };

struct WaveFunction {
  Grid grid;
  std::vector<cplx> amp;
  Space space = Space::position;

  WaveFunction() = default;
  WaveFunction(Grid g, Space s = Space::position) : grid(g), amp(g.n_points), space(s) {}
  WaveFunction(Grid g, std::vector<cplx> a, Space s) : grid(g), amp(std::move(a)), space(s) {
    if (amp.size() != grid.n_points)
      throw Error(Errc::DimensionMismatch, "amplitude count does not match grid");
  }

  std::size_t size() const { return amp.size(); }

  double norm2() const {
    double s = 0.0;
    for (const auto& a : amp) s += std::norm(a);
    return s * grid.spacing();
  }

  bool all_finite() const {
    return std::all_of(amp.begin(), amp.end(),
                       [](cplx a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); });
  }
};

inline void require_same_grid(const WaveFunction& a, const WaveFunction& b) {
  if (!(a.grid == b.grid) || a.space != b.space)
    throw Error(Errc::GridMismatch, "wavefunctions live on different grids");
}

/// <a|b> by Riemann sum on the shared grid.
inline cplx inner(const WaveFunction& a, const WaveFunction& b) {
  require_same_grid(a, b);
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.amp.size(); ++i) s += std::conj(a.amp[i]) * b.amp[i];
  return s * a.grid.spacing();
}

inline WaveFunction scaled(const WaveFunction& w, cplx factor) {
  WaveFunction out = w;
  for (auto& a : out.amp) a *= factor;
  return out;
}

inline WaveFunction normalized(const WaveFunction& w) {
  const double n2 = w.norm2();
  if (!(n2 > 0.0)) throw Error(Errc::EmptyState, "cannot normalize a zero wavefunction");
  return scaled(w, 1.0 / std::sqrt(n2));
}

/// Multiplies by exp(i * (k * coordinate + phase)).
inline WaveFunction plane_wave_factor(const WaveFunction& w, double k, double phase = 0.0) {
  WaveFunction out = w;
  const double dx = w.grid.spacing();
  for (std::size_t i = 0; i < out.amp.size(); ++i) {
    const double arg = k * (w.grid.x_min + dx * static_cast<double>(i)) + phase;
    out.amp[i] *= cplx(std::cos(arg), std::sin(arg));
  }
  return out;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// ---------------------------------------------------------------------------
// Threading. Work is split into contiguous index chunks; each index is
// computed independently so results never depend on the worker count.

inline std::size_t& thread_setting() {
  static std::size_t n = [] {
    if (const char* env = std::getenv("KICKSIM_THREADS")) {
      const long v = std::strtol(env, nullptr, 10);
      if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::size_t{1};
  }();
  return n;
}

inline void set_threads(std::size_t n) { thread_setting() = std::max<std::size_t>(1, n); }
inline std::size_t threads() { return thread_setting(); }

template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min(threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace kicksim
