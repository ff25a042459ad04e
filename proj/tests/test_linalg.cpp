#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "almsics/linalg.hpp"
#include "test_support.hpp"

using namespace almsics;
using almsics::testing::random_symmetric;

namespace {

SymMatrixd diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return SymMatrixd::diagonal(d);
}

SymMatrixd swap2() {
  Eigen::Matrix2d m;
  m << 0, 1, 1, 0;
  return SymMatrixd(m);
}

}  // namespace

TEST(SymMatrix, SymmetrizesOnConstruction) {
  Eigen::Matrix2d a;
  a << 1, 2, 4, 3;
  SymMatrixd s(a);
  EXPECT_EQ(s(0, 1), 3.0);
  EXPECT_EQ(s(1, 0), 3.0);
  EXPECT_EQ(s(0, 0), 1.0);
}

TEST(SymMatrix, RejectsNonSquareAndNonFinite) {
  EXPECT_THROW(SymMatrixd(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  a(0, 1) = std::nan("");
  EXPECT_THROW(SymMatrixd{a}, DomainError);
}

TEST(SymMatrix, ArithmeticStaysSymmetric) {
  std::mt19937_64 rng(3);
  SymMatrixd a(random_symmetric(6, rng));
  SymMatrixd b(random_symmetric(6, rng));
  const SymMatrixd c = 2.0 * a - b / 4.0 + (-a);
  EXPECT_TRUE(c.matrix().isApprox(a.matrix() - 0.25 * b.matrix()));
  EXPECT_EQ(c.matrix(), c.matrix().transpose());
  EXPECT_THROW(a + SymMatrixd::identity(3), std::invalid_argument);
}

TEST(SymEig, IdentityHasUnitEigenvalues) {
  const auto e = sym_eig(SymMatrixd::identity(3));
  EXPECT_TRUE(e.eigenvalues.isApprox(Eigen::Vector3d::Ones()));
  EXPECT_LE((e.basis.transpose() * e.basis - Eigen::Matrix3d::Identity()).norm(), 1e-10 * 3);
}

TEST(SymEig, DiagonalSortedAscending) {
  const auto e = sym_eig(diag({3, 1, 2}));
  EXPECT_NEAR(e.eigenvalues(0), 1, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), 2, 1e-14);
  EXPECT_NEAR(e.eigenvalues(2), 3, 1e-14);
}

TEST(SymEig, TwoByTwoSwap) {
  const auto e = sym_eig(swap2());
  EXPECT_NEAR(e.eigenvalues(0), -1, 1e-14);
  EXPECT_NEAR(e.eigenvalues(1), 1, 1e-14);
}

TEST(SymEig, RoundTripAndOrthonormalBasis) {
  std::mt19937_64 rng(11);
  for (Index n : {1, 2, 5, 17, 50}) {
    const SymMatrixd a(random_symmetric(n, rng, 3.0));
    const auto e = sym_eig(a);
    const double scale = std::max(1.0, a.matrix().norm());
    EXPECT_LE((reconstruct(e).matrix() - a.matrix()).norm(), 1e-10 * scale) << "n=" << n;
    EXPECT_LE((e.basis.transpose() * e.basis - Eigen::MatrixXd::Identity(n, n)).norm(),
              1e-10 * static_cast<double>(n));
    for (Index i = 1; i < n; ++i) EXPECT_LE(e.eigenvalues(i - 1), e.eigenvalues(i));
  }
}

TEST(Shrink, Examples) {
  EXPECT_DOUBLE_EQ(shrink(diag({3.0}), 1.0)(0, 0), 2.0);
  EXPECT_EQ(shrink(diag({-0.5}), 1.0)(0, 0), 0.0);
  std::mt19937_64 rng(5);
  const SymMatrixd z(random_symmetric(4, rng));
  EXPECT_EQ(shrink(z, 0.0), z);
  EXPECT_THROW(shrink(z, -1.0), std::invalid_argument);
}

TEST(Shrink, TruncatedEntriesAreExactZeros) {
  std::mt19937_64 rng(6);
  const SymMatrixd z(random_symmetric(8, rng));
  const SymMatrixd s = shrink(z, 0.7);
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) {
      if (std::abs(z(i, j)) <= 0.7) {
        EXPECT_EQ(s(i, j), 0.0);
        EXPECT_FALSE(std::signbit(s(i, j)) && s(i, j) != 0.0);
      } else {
        EXPECT_NEAR(std::abs(s(i, j)), std::abs(z(i, j)) - 0.7, 1e-15);
      }
    }
}

TEST(Shrink, Nonexpansive) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const SymMatrixd a(random_symmetric(6, rng));
    const SymMatrixd b(random_symmetric(6, rng));
    const double tau = std::uniform_real_distribution<double>(0, 2)(rng);
    EXPECT_LE((shrink(a, tau) - shrink(b, tau)).matrix().norm(), (a - b).matrix().norm() + 1e-14);
  }
}

TEST(InverseFromEig, Examples) {
  EXPECT_TRUE(inverse_from_eig(sym_eig(SymMatrixd(2.0 * Eigen::Matrix2d::Identity())))
                  .matrix()
                  .isApprox(0.5 * Eigen::Matrix2d::Identity()));
  const auto inv = inverse_from_eig(sym_eig(diag({1, 4})));
  EXPECT_NEAR(inv(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(inv(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(inv(0, 1), 0.0, 1e-15);
  EXPECT_THROW(inverse_from_eig(sym_eig(diag({1e-15, 1}))), SingularMatrixError);
}

TEST(InverseFromEig, TimesSourceIsIdentity) {
  std::mt19937_64 rng(8);
  for (Index n : {2, 10, 30}) {
    const SymMatrixd a(almsics::testing::random_spd(n, rng));
    const auto inv = inverse_from_eig(sym_eig(a));
    EXPECT_LE((inv.matrix() * a.matrix() - Eigen::MatrixXd::Identity(n, n)).norm(),
              1e-8 * static_cast<double>(n));
  }
}

TEST(LogDetFromEig, Examples) {
  EXPECT_DOUBLE_EQ(log_det_from_eig(sym_eig(SymMatrixd::identity(3))), 0.0);
  EXPECT_NEAR(log_det_from_eig(sym_eig(diag({std::numbers::e, std::numbers::e}))), 2.0, 1e-14);
  EXPECT_THROW(log_det_from_eig(sym_eig(diag({-1, 2}))), NotPositiveDefiniteError);
}

TEST(LogDet, CholeskyAgreesWithEigenvalues) {
  std::mt19937_64 rng(12);
  const SymMatrixd a(almsics::testing::random_spd(12, rng));
  const auto ld = log_det_if_positive_definite(a);
  ASSERT_TRUE(ld.has_value());
  EXPECT_NEAR(*ld, log_det_from_eig(sym_eig(a)), 1e-10);
  EXPECT_FALSE(log_det_if_positive_definite(diag({1, -1})).has_value());
}

TEST(Norms, Examples) {
  auto n = norms(SymMatrixd::identity(2));
  EXPECT_DOUBLE_EQ(n.l1, 2);
  EXPECT_DOUBLE_EQ(n.inf, 1);
  EXPECT_DOUBLE_EQ(n.fro, std::sqrt(2.0));
  EXPECT_NEAR(n.spectral, 1, 1e-15);

  n = norms(swap2());
  EXPECT_DOUBLE_EQ(n.l1, 2);
  EXPECT_DOUBLE_EQ(n.inf, 1);
  EXPECT_NEAR(n.spectral, 1, 1e-15);

  n = norms(SymMatrixd::zero(3));
  EXPECT_EQ(n.l1, 0);
  EXPECT_EQ(n.inf, 0);
  EXPECT_EQ(n.fro, 0);
  EXPECT_EQ(n.spectral, 0);
}

TEST(Norms, SpectralBelowFrobeniusBelowL1) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = norms(SymMatrixd(random_symmetric(1 + trial % 9, rng)));
    EXPECT_LE(n.spectral, n.fro * (1 + 1e-14));
    EXPECT_LE(n.fro, n.l1 * (1 + 1e-14));
  }
}

TEST(IsPositiveDefinite, Examples) {
  EXPECT_TRUE(is_positive_definite(SymMatrixd::identity(4)));
  EXPECT_FALSE(is_positive_definite(diag({1, -1})));
  EXPECT_FALSE(is_positive_definite(diag({1e-14, 1}), 1e-10));
  EXPECT_TRUE(is_positive_definite(diag({1e-9, 1}), 1e-10));
}

TEST(Inner, MatchesTraceForm) {
  std::mt19937_64 rng(10);
  const SymMatrixd a(random_symmetric(5, rng));
  const SymMatrixd b(random_symmetric(5, rng));
  EXPECT_NEAR(inner(a, b), (a.matrix() * b.matrix()).trace(), 1e-12);
  EXPECT_NEAR(squared_norm(a), a.matrix().squaredNorm(), 1e-12);
}

TEST(SymMatrix, FloatInstantiation) {
  SymMatrix<float> a(Eigen::Matrix2f::Identity());
  const auto e = sym_eig(a);
  EXPECT_FLOAT_EQ(e.max_eigenvalue(), 1.0f);
  EXPECT_FLOAT_EQ(shrink(a, 0.25f)(0, 0), 0.75f);
}
