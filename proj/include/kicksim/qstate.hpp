#pragma once

// Slit wavefunctions and particle (x) detector entangled states.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kicksim/core.hpp"
#include "kicksim/ubasis.hpp"

namespace kicksim {

enum class SlitProfile { gaussian, tophat };
enum class SlitOrigin { at_zero, centered };

inline constexpr double kOverlapTolerance = 1e-8;

/// n equally spaced apertures. at_zero puts slit k at k*d; centered places
/// them symmetrically about x = 0 (+-d/2 for two slits, -d, 0, d for three).
struct SlitArray {
  std::size_t n = 2;
  double d = 1.0;
  double sigma = 0.05;
  SlitProfile profile = SlitProfile::gaussian;
  SlitOrigin origin = SlitOrigin::at_zero;

  void validate() const {
    if (n < 2) throw Error(Errc::InvalidDimension, "slit count must be >= 2");
    if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::InvalidArgument, "slit spacing d must be > 0");
    if (!(sigma > 0.0) || sigma > d / 4.0 * (1.0 + 1e-12))
      throw Error(Errc::InvalidArgument, "slit width sigma must satisfy 0 < sigma <= d/4");
  }

  double center(std::size_t k) const {
    const double offset = origin == SlitOrigin::centered ? 0.5 * static_cast<double>(n - 1) * d : 0.0;
    return static_cast<double>(k) * d - offset;
  }

  std::vector<double> centers() const {
    std::vector<double> c(n);
    for (std::size_t k = 0; k < n; ++k) c[k] = center(k);
    return c;
  }
};

/// Span [first - 4d, last + 4d]; the point count is the smallest power of two
/// >= min_points that still resolves sigma with 8 samples.
inline Grid default_grid(const SlitArray& slits, std::size_t min_points = 4096) {
  slits.validate();
  Grid g;
  g.x_min = slits.center(0) - 4.0 * slits.d;
  g.x_max = slits.center(slits.n - 1) + 4.0 * slits.d;
  std::size_t n = 2;
  while (n < min_points) n <<= 1;
  while (g.span() / static_cast<double>(n - 1) > slits.sigma / 8.0) n <<= 1;
  g.n_points = n;
  return g;
}

inline void validate_grid_for(const Grid& grid, const SlitArray& slits) {
  grid.validate();
  slits.validate();
  if (grid.spacing() > slits.sigma / 8.0 * (1.0 + 1e-12))
    throw Error(Errc::GridTooCoarse, "grid spacing " + std::to_string(grid.spacing()) +
                                         " exceeds sigma/8 = " + std::to_string(slits.sigma / 8.0));
  const double margin = 8.0 * slits.sigma;
  if (slits.center(0) - margin < grid.x_min || slits.center(slits.n - 1) + margin > grid.x_max)
    throw Error(Errc::InvalidArgument, "grid must span every slit center with an 8 sigma margin");
}

inline double max_pairwise_overlap(const std::vector<WaveFunction>& states) {
  double worst = 0.0;
  for (std::size_t j = 0; j < states.size(); ++j)
    for (std::size_t k = j + 1; k < states.size(); ++k)
      worst = std::max(worst, std::abs(inner(states[j], states[k])));
  return worst;
}

inline void require_near_orthogonal(const std::vector<WaveFunction>& states) {
  const double worst = max_pairwise_overlap(states);
  if (!(worst < kOverlapTolerance))
    throw Error(Errc::OverlapTooLarge, "pairwise slit overlap " + std::to_string(worst) + " >= 1e-8");
}

/// One unit-normalized state per slit, centered on the slit.
inline std::vector<WaveFunction> make_slit_states(const SlitArray& slits, const Grid& grid) {
  validate_grid_for(grid, slits);
  std::vector<WaveFunction> out;
  out.reserve(slits.n);
  for (std::size_t k = 0; k < slits.n; ++k) {
    WaveFunction w(grid, Space::position);
    const double c = slits.center(k);
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double u = grid.x(i) - c;
      if (slits.profile == SlitProfile::gaussian) {
        w.amp[i] = std::exp(-u * u / (2.0 * slits.sigma * slits.sigma));
      } else {
        w.amp[i] = std::abs(u) <= slits.sigma * (1.0 + 1e-12) ? 1.0 : 0.0;
      }
    }
    out.push_back(normalized(w));
  }
  require_near_orthogonal(out);
  return out;
}

/// sum_k coeffs[k] * states[k]. Coefficients must have unit Euclidean norm.
inline WaveFunction superpose(const std::vector<WaveFunction>& states, const std::vector<cplx>& coeffs) {
  if (states.empty() || states.size() != coeffs.size())
    throw Error(Errc::DimensionMismatch, "need one coefficient per state");
  double cn = 0.0;
  for (auto c : coeffs) cn += std::norm(c);
  if (std::abs(cn - 1.0) > 1e-10) throw Error(Errc::InvalidArgument, "coefficient vector must have unit norm");
  WaveFunction out(states[0].grid, states[0].space);
  for (std::size_t k = 0; k < states.size(); ++k) {
    require_same_grid(states[0], states[k]);
    for (std::size_t i = 0; i < out.amp.size(); ++i) out.amp[i] += coeffs[k] * states[k].amp[i];
  }
  return out;
}

/// Equal-weight superposition (1/sqrt n) sum_k psi_k: the no-detector state.
inline WaveFunction uniform_superposition(const std::vector<WaveFunction>& states) {
  const cplx c = 1.0 / std::sqrt(static_cast<double>(states.size()));
  return superpose(states, std::vector<cplx>(states.size(), c));
}

/// A detector state as coordinates in an orthonormal frame; unit norm to 1e-12.
struct DetectorVector {
  Eigen::VectorXcd coeffs;

  explicit DetectorVector(Eigen::VectorXcd c) : coeffs(std::move(c)) {
    if (coeffs.size() == 0 || std::abs(coeffs.norm() - 1.0) > 1e-12)
      throw Error(Errc::InvalidArgument, "detector vector must have unit norm");
  }
};

/// Two unit detector states with real overlap <d1|d2> = c, embedded in a 2-D frame.
inline std::vector<DetectorVector> two_state_detector(double overlap) {
  if (!(overlap >= 0.0 && overlap <= 1.0)) throw Error(Errc::InvalidArgument, "overlap must be in [0, 1]");
  Eigen::VectorXcd d1(2), d2(2);
  d1 << 1.0, 0.0;
  d2 << overlap, std::sqrt(1.0 - overlap * overlap);
  return {DetectorVector(d1), DetectorVector(d2)};
}

/// Component k is the particle state paired with the k-th vector of the
/// detector basis named by basis_tag.
struct EntangledState {
  std::vector<WaveFunction> components;
  std::string basis_tag;

  std::size_t dim() const { return components.size(); }

  double total_norm2() const {
    double s = 0.0;
    for (const auto& c : components) s += c.norm2();
    return s;
  }

  const Grid& grid() const { return components.at(0).grid; }
};

inline void require_shared_grid(const EntangledState& s) {
  if (s.components.empty()) throw Error(Errc::EmptyState, "entangled state has no components");
  for (const auto& c : s.components) require_same_grid(s.components[0], c);
}

/// (1/sqrt n) sum_k psi_k |d_k> with orthonormal which-way states.
inline EntangledState entangle(const std::vector<WaveFunction>& states) {
  if (states.size() < 2) throw Error(Errc::InvalidDimension, "entanglement needs n >= 2 paths");
  require_near_orthogonal(states);
  const double s = 1.0 / std::sqrt(static_cast<double>(states.size()));
  EntangledState out{{}, "which-way"};
  for (const auto& w : states) out.components.push_back(scaled(w, s));
  require_shared_grid(out);
  return out;
}

/// (1/sqrt n) sum_k psi_k |d_k> for arbitrary unit detector states |d_k>,
/// expanded in the orthonormal frame the detector vectors are written in.
inline EntangledState entangle_with_detector(const std::vector<WaveFunction>& states,
                                             const std::vector<DetectorVector>& detector) {
  if (states.size() < 2) throw Error(Errc::InvalidDimension, "entanglement needs n >= 2 paths");
  if (detector.size() != states.size())
    throw Error(Errc::DimensionMismatch, "need one detector state per path");
  require_near_orthogonal(states);
  const auto frame = detector[0].coeffs.size();
  for (const auto& d : detector)
    if (d.coeffs.size() != frame) throw Error(Errc::DimensionMismatch, "detector vectors differ in dimension");

  const double s = 1.0 / std::sqrt(static_cast<double>(states.size()));
  EntangledState out{{}, "detector-frame"};
  for (Eigen::Index m = 0; m < frame; ++m) {
    WaveFunction w(states[0].grid, states[0].space);
    for (std::size_t k = 0; k < states.size(); ++k) {
      const cplx c = s * detector[k].coeffs(m);
      if (c == cplx{}) continue;
      for (std::size_t i = 0; i < w.amp.size(); ++i) w.amp[i] += c * states[k].amp[i];
    }
    out.components.push_back(std::move(w));
  }
  return out;
}

/// Re-express the detector part in another orthonormal basis:
/// c'_j = sum_k M(j, k) c_k = <alpha_j|Psi>.
inline EntangledState change_basis(const EntangledState& state, const DetectorBasis& basis) {
  require_shared_grid(state);
  if (basis.dim() != state.dim())
    throw Error(Errc::DimensionMismatch, "basis dimension does not match the state");
  require_unitary(basis.matrix);

  const std::size_t n = state.dim();
  const std::size_t points = state.grid().n_points;
  EntangledState out{std::vector<WaveFunction>(n, WaveFunction(state.grid(), state.components[0].space)),
                     basis.tag};
  parallel_for(points, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc{};
      for (std::size_t k = 0; k < n; ++k)
        acc += basis.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) *
               state.components[k].amp[i];
      out.components[j].amp[i] = acc;
    }
  });
  return out;
}

struct Conditioned {
  WaveFunction state;  // normalized, or all zeros when probability == 0
  double probability = 0.0;
};

/// Post-select on detector outcome j of the basis the state is written in.
inline Conditioned condition(const EntangledState& state, std::size_t j) {
  if (j >= state.dim()) throw Error(Errc::IndexOutOfRange, "outcome index " + std::to_string(j));
  const WaveFunction& c = state.components[j];
  const double p = c.norm2();
  if (p == 0.0) return {c, 0.0};
  return {scaled(c, 1.0 / std::sqrt(p)), p};
}

}  // namespace kicksim
