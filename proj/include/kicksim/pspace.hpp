#pragma once

// Momentum-space two-"slit" interference: two distinct momentum peaks play
// the role of the slits, and the d- phase flip becomes a random position
// kick x0 = h / 2(p2 - p1).

#include "kicksim/core.hpp"
#include "kicksim/kicks.hpp"
#include "kicksim/propagate.hpp"
#include "kicksim/qstate.hpp"

namespace kicksim {

struct MomentumPeaks {
  double p1 = 0.0;
  double p2 = 1.0;
  double width = 0.05;
  Grid grid;  // momentum axis

  void validate() const {
    grid.validate();
    if (!(p2 > p1)) throw Error(Errc::InvalidArgument, "momentum peaks need p2 > p1");
    if (!(width > 0.0) || width > (p2 - p1) / 8.0 * (1.0 + 1e-12))
      throw Error(Errc::InvalidArgument, "peak width must satisfy 0 < width <= (p2 - p1)/8");
    if (grid.spacing() > width / 8.0 * (1.0 + 1e-12))
      throw Error(Errc::GridTooCoarse, "momentum grid must resolve the peak width with 8 points");
    if (p1 - 8.0 * width < grid.x_min || p2 + 8.0 * width > grid.x_max)
      throw Error(Errc::InvalidArgument, "momentum grid must span both peaks with an 8 width margin");
  }
};

/// Momentum axis [p1 - 4 dp, p2 + 4 dp] resolving the width with 8 points.
inline Grid default_momentum_grid(double p1, double p2, double width, std::size_t min_points = 4096) {
  const double dp = p2 - p1;
  Grid g{p1 - 4.0 * dp, p2 + 4.0 * dp, 2};
  std::size_t n = 2;
  while (n < min_points) n <<= 1;
  while (g.span() / static_cast<double>(n - 1) > width / 8.0) n <<= 1;
  g.n_points = n;
  return g;
}

/// The two normalized momentum peaks psi_1(p), psi_2(p).
inline std::vector<WaveFunction> make_momentum_peaks(const MomentumPeaks& peaks) {
  peaks.validate();
  std::vector<WaveFunction> out;
  for (double c : {peaks.p1, peaks.p2}) {
    WaveFunction w(peaks.grid, Space::momentum);
    for (std::size_t i = 0; i < peaks.grid.n_points; ++i) {
      const double u = peaks.grid.x(i) - c;
      w.amp[i] = std::exp(-u * u / (2.0 * peaks.width * peaks.width));
    }
    out.push_back(normalized(w));
  }
  require_near_orthogonal(out);
  return out;
}

/// (psi_1(p) + psi_2(p)) / sqrt 2.
inline WaveFunction make_momentum_state(const MomentumPeaks& peaks) {
  return uniform_superposition(make_momentum_peaks(peaks));
}

/// x0 = h / 2(p2 - p1) = pi / (p2 - p1) with hbar = 1.
inline double position_kick_value(double p1, double p2) {
  if (p1 == p2) throw Error(Errc::DegenerateMomenta, "p1 == p2 gives no position kick");
  return kPi / (p2 - p1);
}

struct PositionKickResult {
  EntangledState kicked;     // d+ component untouched, d- = e^{-i p1 x0} e^{i p x0} (d+ component)
  FidelityRecord fidelity;   // against the phase-flip form
  double x0 = 0.0;
};

/// Rewrites the d- component of a momentum-space state in the d+- basis as a
/// position kick of the d+ component.
inline PositionKickResult position_kick_representation(const EntangledState& state, const MomentumPeaks& peaks) {
  if (state.dim() != 2) throw Error(Errc::DimensionMismatch, "position kick form is a two-peak statement");
  if (state.components[0].space != Space::momentum)
    throw Error(Errc::InvalidArgument, "state must live on a momentum grid");
  PositionKickResult r;
  r.x0 = position_kick_value(peaks.p1, peaks.p2);
  const WaveFunction& plus = state.components[0];
  r.kicked = EntangledState{{plus, plane_wave_factor(plus, r.x0, -peaks.p1 * r.x0)}, state.basis_tag};
  r.fidelity = representation_fidelity(state, r.kicked);
  return r;
}

/// Closed-form fidelity for Gaussian peaks: (1 + exp(-x0^2 w^2 / 4)) / 2.
inline double gaussian_position_kick_fidelity(double p1, double p2, double width) {
  const double x0 = position_kick_value(p1, p2);
  return 0.5 * (1.0 + std::exp(-x0 * x0 * width * width / 4.0));
}

struct DualityRecord {
  double position_fidelity = 0.0;
  double momentum_fidelity = 0.0;
  double difference = 0.0;
};

/// Runs the two-slit kick-equivalence pipeline and its momentum-space mirror
/// (x <-> p, d <-> dp = 2 pi/d, same relative width) and compares fidelities.
inline DualityRecord duality_check(double d, double sigma, std::size_t min_points = 4096) {
  SlitArray slits{2, d, sigma, SlitProfile::gaussian, SlitOrigin::at_zero};
  const Grid xg = default_grid(slits, min_points);
  const auto xs = make_slit_states(slits, xg);
  const DetectorBasis f2 = fourier_basis(2);
  const EntangledState pos_state = change_basis(entangle(xs), f2);
  const KickSpectrum spec = kick_spectrum(2, d, true);
  const EntangledState pos_kick =
      kick_representation(uniform_superposition(xs), spec, lattice_phases(f2, spec, slits), f2.tag);

  const double dp = 2.0 * kPi / d;
  const double scale = dp / d;
  MomentumPeaks peaks{0.0, dp, sigma * scale, Grid{xg.x_min * scale, xg.x_max * scale, xg.n_points}};
  const EntangledState mom_state = change_basis(entangle(make_momentum_peaks(peaks)), f2);
  const PositionKickResult mom = position_kick_representation(mom_state, peaks);

  DualityRecord r;
  r.position_fidelity = representation_fidelity(pos_state, pos_kick).global;
  r.momentum_fidelity = mom.fidelity.global;
  r.difference = std::abs(r.position_fidelity - r.momentum_fidelity);
  return r;
}

/// Position-space screen for momentum-space interference: [-8/w, 8/w].
inline Grid default_position_screen(double width, std::size_t points = 4096) {
  return Grid{-8.0 / width, 8.0 / width, points};
}

}  // namespace kicksim
