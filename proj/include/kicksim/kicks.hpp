#pragma once

// Momentum-kick representation of which-way entanglement.
//
// In an unbiased (Fourier-type) detector basis every conditioned particle
// state is the undisturbed superposition times a plane wave exp(i p_j x),
// with p_j = j h / (n d). The identity is exact on the slit lattice and holds
// for finite slits up to the spread of exp(i p_j x) across one aperture.

#include <numeric>
#include <optional>

#include "kicksim/core.hpp"
#include "kicksim/qstate.hpp"
#include "kicksim/ubasis.hpp"

namespace kicksim {

/// Exact rational multiple of h/d.
struct Fraction {
  long num = 0;
  long den = 1;

  static Fraction reduced(long n, long d) {
    if (d < 0) { n = -n; d = -d; }
    const long g = std::gcd(n, d);
    return g == 0 ? Fraction{0, 1} : Fraction{n / g, d / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Fraction abs() const { return {num < 0 ? -num : num, den}; }
  bool operator==(const Fraction&) const = default;
  auto operator<=>(const Fraction& o) const { return num * o.den <=> o.num * den; }
};

struct Kick {
  std::size_t outcome = 0;
  Fraction in_h_over_d;  // p_j / (h/d)
  double momentum = 0.0; // p_j with hbar = 1
  double probability = 0.0;
};

struct KickSpectrum {
  std::size_t n = 0;
  double d = 1.0;
  bool folded = false;
  std::vector<Kick> kicks;

  Fraction max_magnitude() const {
    Fraction m{0, 1};
    for (const auto& k : kicks) m = std::max(m, k.in_h_over_d.abs());
    return m;
  }
  std::optional<Fraction> min_nonzero_magnitude() const {
    std::optional<Fraction> m;
    for (const auto& k : kicks) {
      if (k.in_h_over_d.num == 0) continue;
      const Fraction a = k.in_h_over_d.abs();
      if (!m || a < *m) m = a;
    }
    return m;
  }
};

/// p_j = j h/(n d), j = 0..n-1. Folding maps j > n/2 to j - n, the alias that
/// is indistinguishable on the slit lattice, giving kicks in (-h/2d, h/2d].
inline KickSpectrum kick_spectrum(std::size_t n, double d, bool folded) {
  if (n < 2) throw Error(Errc::InvalidDimension, "kick spectrum needs n >= 2");
  if (!(d > 0.0)) throw Error(Errc::InvalidArgument, "slit spacing must be > 0");
  KickSpectrum s{n, d, folded, {}};
  const auto nn = static_cast<long>(n);
  for (long j = 0; j < nn; ++j) {
    const long num = folded && 2 * j > nn ? j - nn : j;
    const Fraction f = Fraction::reduced(num, nn);
    s.kicks.push_back({static_cast<std::size_t>(j), f, kPlanck * static_cast<double>(num) / (static_cast<double>(nn) * d),
                       1.0 / static_cast<double>(n)});
  }
  return s;
}

/// Constant phases phi_j making exp(i (phi_j + p_j x_k)) reproduce sqrt(n) M(j, k)
/// at every slit center: phi_j = arg M(j, 0) - p_j x_0.
inline std::vector<double> lattice_phases(const DetectorBasis& basis, const KickSpectrum& spectrum,
                                          const SlitArray& slits) {
  if (basis.dim() != spectrum.n || slits.n != spectrum.n)
    throw Error(Errc::DimensionMismatch, "basis, spectrum and slit array must agree on n");
  std::vector<double> phi(spectrum.n);
  for (std::size_t j = 0; j < spectrum.n; ++j)
    phi[j] = wrap_angle(std::arg(basis.matrix(static_cast<Eigen::Index>(j), 0)) -
                        spectrum.kicks[j].momentum * slits.center(0));
  return phi;
}

/// max_{j,k} | exp(i (phi_j + p_j x_k)) - sqrt(n) M(j, k) |.
inline double lattice_identity_defect(const DetectorBasis& basis, const KickSpectrum& spectrum,
                                      const SlitArray& slits, const std::vector<double>& phases) {
  const double root_n = std::sqrt(static_cast<double>(spectrum.n));
  double worst = 0.0;
  for (std::size_t j = 0; j < spectrum.n; ++j)
    for (std::size_t k = 0; k < spectrum.n; ++k) {
      const cplx lhs = std::polar(1.0, phases[j] + spectrum.kicks[j].momentum * slits.center(k));
      const cplx rhs = root_n * basis.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  return worst;
}

/// component_j = (1/sqrt n) exp(i phi_j) exp(i p_j x) base.
inline EntangledState kick_representation(const WaveFunction& base, const KickSpectrum& spectrum,
                                          const std::vector<double>& constant_phases,
                                          std::string basis_tag = "fourier") {
  if (constant_phases.size() != spectrum.n || spectrum.kicks.size() != spectrum.n)
    throw Error(Errc::DimensionMismatch, "need one constant phase per kick");
  const double s = 1.0 / std::sqrt(static_cast<double>(spectrum.n));
  EntangledState out{{}, std::move(basis_tag)};
  for (std::size_t j = 0; j < spectrum.n; ++j)
    out.components.push_back(scaled(plane_wave_factor(base, spectrum.kicks[j].momentum, constant_phases[j]), s));
  return out;
}

struct FidelityRecord {
  std::vector<double> per_component;  // |<a_j|b_j>| / (|a_j| |b_j|)
  double global = 0.0;                // |sum_j <a_j|b_j>|
};

inline FidelityRecord representation_fidelity(const EntangledState& a, const EntangledState& b) {
  if (a.dim() != b.dim()) throw Error(Errc::DimensionMismatch, "states differ in detector dimension");
  if (a.basis_tag != b.basis_tag)
    throw Error(Errc::InvalidArgument, "states are written in different detector bases: " + a.basis_tag +
                                           " vs " + b.basis_tag);
  FidelityRecord r;
  cplx total{};
  for (std::size_t j = 0; j < a.dim(); ++j) {
    const cplx ov = inner(a.components[j], b.components[j]);
    total += ov;
    const double na = std::sqrt(a.components[j].norm2());
    const double nb = std::sqrt(b.components[j].norm2());
    r.per_component.push_back(na > 0.0 && nb > 0.0 ? std::abs(ov) / (na * nb) : 0.0);
  }
  r.global = std::abs(total);
  return r;
}

/// Closed-form global fidelity for Gaussian slits exp(-(x-c)^2 / 2 sigma^2):
/// (1/n) sum_j exp(-p_j^2 sigma^2 / 4).
inline double gaussian_kick_fidelity(const KickSpectrum& spectrum, double sigma) {
  double s = 0.0;
  for (const auto& k : spectrum.kicks) s += std::exp(-k.momentum * k.momentum * sigma * sigma / 4.0);
  return s / static_cast<double>(spectrum.n);
}

// ---------------------------------------------------------------------------
// Kick extraction from data

struct KickFit {
  double kick = 0.0;          // fitted phase gradient
  double phase = 0.0;         // fitted phase at x = 0, wrapped to (-pi, pi]
  std::vector<double> slit_phases;
};

/// Fits arg(to / from) against x across the slit supports. Each slit
/// contributes its overlap-weighted mean phase; phases are unwrapped slit to
/// slit (steps in (-pi, pi], a tie at -pi resolved to +pi) and fitted with a
/// weighted line.
inline KickFit fit_kick(const WaveFunction& from, const WaveFunction& to, const SlitArray& slits) {
  require_same_grid(from, to);
  std::vector<cplx> sums(slits.n);
  for (std::size_t i = 0; i < from.amp.size(); ++i) {
    const double x = from.grid.x(i);
    for (std::size_t k = 0; k < slits.n; ++k)
      if (std::abs(x - slits.center(k)) < 0.5 * slits.d) sums[k] += to.amp[i] * std::conj(from.amp[i]);
  }
  KickFit fit;
  std::vector<double> w(slits.n);
  for (std::size_t k = 0; k < slits.n; ++k) {
    double ph = std::arg(sums[k]);
    if (k > 0) {
      double step = wrap_angle(ph - fit.slit_phases[k - 1]);
      if (step <= -kPi + 1e-9) step += 2.0 * kPi;
      ph = fit.slit_phases[k - 1] + step;
    }
    fit.slit_phases.push_back(ph);
    w[k] = std::abs(sums[k]);
  }
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < slits.n; ++k) {
    const double x = slits.center(k), y = fit.slit_phases[k];
    sw += w[k]; sx += w[k] * x; sy += w[k] * y; sxx += w[k] * x * x; sxy += w[k] * x * y;
  }
  const double det = sw * sxx - sx * sx;
  if (sw > 0.0 && det > 0.0) {
    fit.kick = (sw * sxy - sx * sy) / det;
    fit.phase = wrap_angle((sy - fit.kick * sx) / sw);
  }
  return fit;
}

/// |<b|e^{i phase} e^{i kick x} a>| / (|a| |b|).
inline double kicked_fidelity(const WaveFunction& a, const WaveFunction& b, double kick, double phase) {
  const WaveFunction ka = plane_wave_factor(a, kick, phase);
  const double na = std::sqrt(a.norm2()), nb = std::sqrt(b.norm2());
  if (!(na > 0.0 && nb > 0.0)) return 0.0;
  return std::abs(inner(b, ka)) / (na * nb);
}

inline constexpr double kEquivalenceFidelity = 0.99;
inline constexpr double kKickTolerance = 0.01;       // relative
inline constexpr double kPhaseTolerance = 0.01;      // radians
inline constexpr double kDisqualifyThreshold = 0.05;

struct GeneralBasisKickRecord {
  double extracted_kick = 0.0;
  double expected_kick = 0.0;     // h/2d
  double kick_relative_error = 0.0;
  double extracted_phase = 0.0;
  std::optional<double> expected_phase;  // theta2 - theta1 - p0 x_0
  std::optional<double> phase_error;
  double fidelity = 0.0;
  double norm_ratio = 0.0;        // |beta| / |alpha|
  bool holds = false;
};

/// Checks that in a two-slit unbiased basis the second component is the first
/// one times a constant phase and exp(i p0 x), p0 = h/2d.
inline GeneralBasisKickRecord general_basis_kick_form(const EntangledState& state, const DetectorBasis& basis,
                                                      const SlitArray& slits) {
  if (state.dim() != 2 || basis.dim() != 2 || slits.n != 2)
    throw Error(Errc::DimensionMismatch, "general basis kick form is a two-slit statement");
  if (!is_unbiased(basis).unbiased) throw Error(Errc::NotUnbiased, "basis " + basis.tag + " is biased");
  if (state.basis_tag != basis.tag)
    throw Error(Errc::InvalidArgument, "state must already be written in basis " + basis.tag);

  const WaveFunction& alpha = state.components[0];
  const WaveFunction& beta = state.components[1];
  GeneralBasisKickRecord r;
  const KickFit fit = fit_kick(alpha, beta, slits);
  r.extracted_kick = fit.kick;
  r.expected_kick = kPlanck / (2.0 * slits.d);
  r.kick_relative_error = std::abs(std::abs(fit.kick) - r.expected_kick) / r.expected_kick;
  r.extracted_phase = fit.phase;
  if (basis.angles) {
    const auto& th = *basis.angles;
    r.expected_phase = wrap_angle(th[1] - th[0] - r.expected_kick * slits.center(0));
    r.phase_error = std::abs(wrap_angle(fit.phase - *r.expected_phase));
  }
  r.fidelity = kicked_fidelity(alpha, beta, fit.kick, fit.phase);
  r.norm_ratio = std::sqrt(beta.norm2() / alpha.norm2());
  r.holds = r.fidelity >= kEquivalenceFidelity && r.kick_relative_error <= kKickTolerance &&
            std::abs(r.norm_ratio - 1.0) <= kDisqualifyThreshold &&
            (!r.phase_error || *r.phase_error <= kPhaseTolerance);
  return r;
}

struct BiasedBasisRecord {
  bool basis_unbiased = false;
  double best_fit_kick = 0.0;
  double infidelity = 0.0;        // 1 - fidelity of the best-fit kick form
  double norm_difference = 0.0;   // | |c_0|^2 - |c_1|^2 |
  bool disqualified_by_fidelity = false;
  bool disqualified_by_norm = false;
  bool kick_form_holds = false;
};

/// Re-expresses a which-way two-slit state in `basis` and tests whether any
/// single plane-wave factor relates the two components.
inline BiasedBasisRecord biased_basis_counterexample(const EntangledState& which_way_state,
                                                     const DetectorBasis& basis, const SlitArray& slits) {
  if (which_way_state.dim() != 2 || basis.dim() != 2 || slits.n != 2)
    throw Error(Errc::DimensionMismatch, "counterexample is a two-slit statement");
  BiasedBasisRecord r;
  r.basis_unbiased = is_unbiased(basis).unbiased;
  const EntangledState s = change_basis(which_way_state, basis);
  const KickFit fit = fit_kick(s.components[0], s.components[1], slits);
  r.best_fit_kick = fit.kick;
  r.infidelity = 1.0 - kicked_fidelity(s.components[0], s.components[1], fit.kick, fit.phase);
  r.norm_difference = std::abs(s.components[0].norm2() - s.components[1].norm2());
  r.disqualified_by_fidelity = r.infidelity > kDisqualifyThreshold;
  r.disqualified_by_norm = r.norm_difference > kDisqualifyThreshold;
  r.kick_form_holds = !r.disqualified_by_fidelity && !r.disqualified_by_norm;
  return r;
}

}  // namespace kicksim
