#pragma once

// Free-particle evolution from the slit plane to the screen.
//
// fresnel_exact: exact spectral evolution on the source grid,
//   psi(t) = IFFT[ exp(-i k^2 t / 2) FFT[psi] ].
// fraunhofer: the far-field amplitude at screen position X is proportional
//   to the momentum representation at p = X / t, so the screen is sampled
//   on a momentum grid and screen position is recovered as p * t.

#include <memory>
#include <mutex>

#include <fftw3.h>

#include "kicksim/core.hpp"
#include "kicksim/qstate.hpp"

namespace kicksim {

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place complex DFT of `data`; sign is FFTW_FORWARD or FFTW_BACKWARD.
// Unnormalized, like FFTW itself.
inline void fft_in_place(std::vector<cplx>& data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace detail

enum class PropagationMode { fresnel_exact, fraunhofer };

inline constexpr double kAliasingThreshold = 1e-6;
inline constexpr std::size_t kAliasingBand = 4;

/// Flight time that puts about ten fringes into the central screen window.
inline double default_flight_time(double d) { return 40.0 * d * d / (2.0 * kPi); }

/// Screen-momentum axis covering +-8/sigma, where a Gaussian slit envelope is exhausted.
inline Grid default_screen_grid(double sigma, std::size_t points = 4096) {
  return Grid{-8.0 / sigma, 8.0 / sigma, points};
}

struct PropagationSpec {
  PropagationMode mode = PropagationMode::fraunhofer;
  double t = 1.0;
  Grid screen;         // fraunhofer only: screen-momentum axis
  double d = 1.0;      // slit spacing, used by the far-field criterion

  void validate() const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(Errc::InvalidArgument, "flight time must be >= 0");
    if (mode == PropagationMode::fraunhofer) screen.validate();
  }
};

inline void check_aliasing(const WaveFunction& w) {
  const std::size_t n = w.amp.size();
  const std::size_t band = std::min(kAliasingBand + 1, n / 2);
  double edge = 0.0;
  for (std::size_t i = 0; i < band; ++i) edge += std::norm(w.amp[i]) + std::norm(w.amp[n - 1 - i]);
  edge *= w.grid.spacing();
  if (edge > kAliasingThreshold)
    throw Error(Errc::AliasingDetected,
                "probability " + std::to_string(edge) + " within 4 grid spacings of the boundary");
}

/// Exact free evolution for time t (negative t runs backwards).
inline WaveFunction evolve_free(const WaveFunction& psi, double t) {
  if (psi.space != Space::position) throw Error(Errc::InvalidArgument, "evolve_free expects a position-space state");
  psi.grid.validate();
  if (t == 0.0) return psi;

  const std::size_t n = psi.amp.size();
  std::vector<cplx> buf = psi.amp;
  detail::fft_in_place(buf, FFTW_FORWARD);
  const double dk = 2.0 * kPi / (static_cast<double>(n) * psi.grid.spacing());
  for (std::size_t m = 0; m < n; ++m) {
    const double idx = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    const double k = idx * dk;
    buf[m] *= std::polar(1.0 / static_cast<double>(n), -0.5 * k * k * t);
  }
  detail::fft_in_place(buf, FFTW_BACKWARD);
  WaveFunction out(psi.grid, std::move(buf), Space::position);
  check_aliasing(out);
  return out;
}

/// Continuous Fourier transform by direct quadrature onto an arbitrary target grid:
///   out(q) = (2 pi)^{-1/2} sum_j in(x_j) exp(sign * i q x_j) dx.
/// sign = -1 maps position -> momentum, +1 maps momentum -> position.
/// Screen points are processed in fixed blocks so results do not depend on
/// the thread count.
inline WaveFunction fourier_transform(const WaveFunction& in, const Grid& target, int sign, Space target_space) {
  target.validate();
  const double dx = in.grid.spacing();
  double peak = 0.0;
  for (const auto& a : in.amp) peak = std::max(peak, std::abs(a));

  std::vector<double> xs;
  std::vector<cplx> ws;
  const double prefactor = dx / std::sqrt(2.0 * kPi);
  for (std::size_t j = 0; j < in.amp.size(); ++j) {
    if (std::abs(in.amp[j]) <= 1e-18 * peak) continue;
    xs.push_back(in.grid.x(j));
    ws.push_back(in.amp[j] * prefactor);
  }

  WaveFunction out(target, target_space);
  constexpr std::size_t kBlock = 64;
  const std::size_t blocks = (target.n_points + kBlock - 1) / kBlock;
  const double dq = target.spacing();
  const double s = static_cast<double>(sign);
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(target.n_points, lo + kBlock);
    const double q0 = target.x(lo);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      cplx z = ws[j] * std::polar(1.0, s * q0 * xs[j]);
      const cplx step = std::polar(1.0, s * dq * xs[j]);
      for (std::size_t i = lo; i < hi; ++i) {
        out.amp[i] += z;
        z *= step;
      }
    }
  });
  return out;
}

/// Momentum representation of a position-space state on the given momentum grid.
inline WaveFunction to_momentum(const WaveFunction& psi, const Grid& momentum_grid) {
  if (psi.space != Space::position) throw Error(Errc::InvalidArgument, "to_momentum expects a position-space state");
  return fourier_transform(psi, momentum_grid, -1, Space::momentum);
}

/// Position representation of a momentum-space state on the given position grid.
inline WaveFunction to_position(const WaveFunction& phi, const Grid& position_grid) {
  if (phi.space != Space::momentum) throw Error(Errc::InvalidArgument, "to_position expects a momentum-space state");
  return fourier_transform(phi, position_grid, +1, Space::position);
}

inline void check_far_field(const Grid& source, double t, double d) {
  const double required = d * source.span() / (2.0 * kPi);
  if (!(t >= required))
    throw Error(Errc::NotFarField, "t = " + std::to_string(t) + " < d*span/(2pi) = " + std::to_string(required));
}

/// Far-field amplitude on the screen-momentum grid (screen position = p * t).
inline WaveFunction to_far_field(const WaveFunction& psi, const PropagationSpec& spec) {
  spec.validate();
  check_far_field(psi.grid, spec.t, spec.d);
  return to_momentum(psi, spec.screen);
}

inline WaveFunction propagate(const WaveFunction& psi, const PropagationSpec& spec) {
  return spec.mode == PropagationMode::fresnel_exact ? evolve_free(psi, spec.t) : to_far_field(psi, spec);
}

/// Evolves every particle component; the detector part is untouched.
inline EntangledState evolve_entangled(const EntangledState& state, const PropagationSpec& spec) {
  require_shared_grid(state);
  spec.validate();
  if (spec.mode == PropagationMode::fraunhofer) check_far_field(state.grid(), spec.t, spec.d);
  EntangledState out{{}, state.basis_tag};
  out.components.reserve(state.dim());
  for (const auto& c : state.components) out.components.push_back(propagate(c, spec));
  return out;
}

}  // namespace kicksim
