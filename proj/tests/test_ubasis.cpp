#include <random>

#include <gtest/gtest.h>

#include "kicksim/ubasis.hpp"

using namespace kicksim;

TEST(Basis, WhichWayIsBiased) {
  const auto b = which_way_basis(3);
  EXPECT_LT(unitarity_defect(b.matrix), 1e-15);
  EXPECT_FALSE(is_unbiased(b).unbiased);
}

TEST(Basis, FourierIsUnitaryAndUnbiased) {
  for (std::size_t n = 2; n <= 16; ++n) {
    const auto b = fourier_basis(n);
    EXPECT_LT(unitarity_defect(b.matrix), 1e-12) << n;
    EXPECT_TRUE(is_unbiased(b).unbiased) << n;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx m = b.matrix(static_cast<Eigen::Index>(j), 0);
      EXPECT_NEAR(m.imag(), 0.0, 1e-15);
      EXPECT_GT(m.real(), 0.0);
    }
  }
  EXPECT_THROW(fourier_basis(1), Error);
}

TEST(Basis, FourierEntriesMatchRootsOfUnity) {
  const std::size_t n = 5;
  const auto b = fourier_basis(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const cplx expect = std::exp(2.0 * kPi * kI * static_cast<double>(j * k) / 5.0) / std::sqrt(5.0);
      EXPECT_NEAR(std::abs(b.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) - expect), 0.0, 1e-15);
    }
}

TEST(Basis, ThreeSlitCentered) {
  const auto b = three_slit_centered_basis();
  EXPECT_LT(unitarity_defect(b.matrix), 1e-15);
  EXPECT_TRUE(is_unbiased(b).unbiased);
  for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(b.matrix(j, 1) - 1.0 / std::sqrt(3.0)), 0.0, 1e-15);
}

TEST(Basis, GeneralTwoSlitPropertyOverRandomAngles) {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 100; ++trial) {
    const double t1 = u(rng), t2 = u(rng), t3 = u(rng);
    const auto b = general_two_slit_basis(t1, t2, t3);
    EXPECT_LT(unitarity_defect(b.matrix), 1e-12);
    EXPECT_TRUE(is_unbiased(b).unbiased);
    ASSERT_TRUE(b.angles.has_value());
    EXPECT_NEAR(wrap_angle((*b.angles)[3] - (t3 - t1 + t2 + kPi)), 0.0, 1e-12);
  }
}

TEST(Basis, RotationIsBiasedExceptAtQuarterPi) {
  EXPECT_FALSE(is_unbiased(rotation_basis(kPi / 6)).unbiased);
  EXPECT_TRUE(is_unbiased(rotation_basis(kPi / 4)).unbiased);
  EXPECT_NEAR(is_unbiased(rotation_basis(kPi / 6)).max_deviation, std::sqrt(0.5) - std::sin(kPi / 6), 1e-15);
}

TEST(Basis, RejectsNonUnitary) {
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 1.0, 0.0, 1.0;
  try {
    make_basis(m, "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotUnitary);
  }
  EXPECT_THROW(make_basis(Eigen::MatrixXcd::Identity(2, 3), "x"), Error);
  Eigen::MatrixXcd near = Eigen::MatrixXcd::Identity(2, 2);
  near(0, 0) += 1e-12;
  EXPECT_NO_THROW(make_basis(near, "x"));
}

TEST(Basis, AdjointInverts) {
  const auto b = fourier_basis(4);
  const Eigen::MatrixXcd p = adjoint(b).matrix * b.matrix;
  EXPECT_LT((p - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-15);
}
