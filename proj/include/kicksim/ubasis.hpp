#pragma once

// Detector bases. A basis is stored as the n x n unitary M with
// M(j, k) = <alpha_j | d_k>: column k holds which-way state |d_k> expressed
// in the new basis, so the particle state paired with |alpha_j> is
// sum_k M(j, k) c_k.

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "kicksim/core.hpp"

namespace kicksim {

struct DetectorBasis {
  Eigen::MatrixXcd matrix;
  std::string tag;
  // Set for bases produced by general_two_slit_basis: (theta1, theta2, theta3, theta4).
  std::optional<std::array<double, 4>> angles;

  std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

inline double unitarity_defect(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) return INFINITY;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return (m * m.adjoint() - id).cwiseAbs().maxCoeff();
}

inline void require_unitary(const Eigen::MatrixXcd& m, double tol = 1e-10) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(Errc::NotUnitary, "basis matrix must be square");
  const double defect = unitarity_defect(m);
  if (!(defect <= tol))
    throw Error(Errc::NotUnitary, "max |U U^dagger - I| = " + std::to_string(defect));
}

inline DetectorBasis make_basis(Eigen::MatrixXcd m, std::string tag) {
  require_unitary(m);
  return DetectorBasis{std::move(m), std::move(tag), std::nullopt};
}

inline DetectorBasis which_way_basis(std::size_t n) {
  if (n < 2) throw Error(Errc::InvalidDimension, "basis dimension must be >= 2");
  const auto dim = static_cast<Eigen::Index>(n);
  return DetectorBasis{Eigen::MatrixXcd::Identity(dim, dim), "which-way", std::nullopt};
}

/// The n-th roots of unity basis: M(j, k) = exp(2 pi i j k / n) / sqrt(n), 0-based.
/// Column 0 is real positive, which is the canonical row phase.
inline DetectorBasis fourier_basis(std::size_t n) {
  if (n < 2) throw Error(Errc::InvalidDimension, "fourier basis needs n >= 2");
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd m(dim, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      // Reduce j*k mod n first so large n keeps the angle exact.
      const auto r = static_cast<double>((j * k) % dim);
      const double a = 2.0 * kPi * r / static_cast<double>(n);
      m(j, k) = scale * cplx(std::cos(a), std::sin(a));
    }
  }
  return DetectorBasis{std::move(m), "fourier", std::nullopt};
}

/// Three-slit eraser basis for slits at -d, 0, d: the middle slit carries phase 1.
inline DetectorBasis three_slit_centered_basis() {
  const double s = 1.0 / std::sqrt(3.0);
  const cplx w = std::polar(1.0, 2.0 * kPi / 3.0);
  const cplx wb = std::conj(w);
  Eigen::MatrixXcd m(3, 3);
  m << s, s, s,
       s * wb, s, s * w,
       s * w, s, s * wb;
  return DetectorBasis{std::move(m), "three-slit-centered", std::nullopt};
}

/// Most general two-slit basis unbiased w.r.t. |d1>, |d2>:
///   |d1> = (e^{i th1}|a> + e^{i th2}|b>)/sqrt2,  |d2> = (e^{i th3}|a> + e^{i th4}|b>)/sqrt2
/// with th4 = th3 - th1 + th2 + pi fixed by orthogonality.
inline DetectorBasis general_two_slit_basis(double theta1, double theta2, double theta3) {
  const double theta4 = theta3 - theta1 + theta2 + kPi;
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << s * std::polar(1.0, theta1), s * std::polar(1.0, theta3),
       s * std::polar(1.0, theta2), s * std::polar(1.0, theta4);
  return DetectorBasis{std::move(m), "general-two-slit",
                       std::array<double, 4>{theta1, theta2, theta3, theta4}};
}

/// Real rotation by angle a, a standard biased (non-eraser) two-state basis.
inline DetectorBasis rotation_basis(double a) {
  Eigen::MatrixXcd m(2, 2);
  m << std::cos(a), -std::sin(a),
       std::sin(a), std::cos(a);
  return DetectorBasis{std::move(m), "rotation", std::nullopt};
}

struct UnbiasedCheck {
  bool unbiased = false;
  double max_deviation = 0.0;  // max_jk | |M_jk| - 1/sqrt(n) |
};

inline UnbiasedCheck is_unbiased(const Eigen::MatrixXcd& m, double tol = 1e-10) {
  require_unitary(m);
  const double target = 1.0 / std::sqrt(static_cast<double>(m.rows()));
  const double dev = (m.cwiseAbs().array() - target).abs().maxCoeff();
  return {dev < tol, dev};
}

inline UnbiasedCheck is_unbiased(const DetectorBasis& b, double tol = 1e-10) {
  return is_unbiased(b.matrix, tol);
}

inline DetectorBasis adjoint(const DetectorBasis& b) {
  return DetectorBasis{b.matrix.adjoint(), b.tag + "^dagger", std::nullopt};
}

}  // namespace kicksim
