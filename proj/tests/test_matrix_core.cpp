#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "wishfx/matrix_core.hpp"

using namespace wishfx;
using namespace wishfx::testing;

namespace {

RMat rk4_expm(const RMat& a, int n) {
  const int d = static_cast<int>(a.rows());
  RMat x = RMat::Identity(d, d);
  const double h = 1.0 / n;
  for (int k = 0; k < n; ++k) {
    const RMat k1 = a * x, k2 = a * (x + 0.5 * h * k1), k3 = a * (x + 0.5 * h * k2), k4 = a * (x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST(SymMat, SymmetryIsStructural) {
  RMat m(3, 3);
  m << 1, 9, 9, 2, 3, 9, 4, 5, 6;
  const SymMat s = SymMat::from_lower(m);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(s(i, j), s(j, i));
  EXPECT_EQ(s(0, 1), 2.0);
  EXPECT_THROW(SymMat::from_full(m), ShapeError);
  EXPECT_THROW(SymMat(0), ShapeError);
}

TEST(PsdMat, RejectsNegativeEigenvalue) {
  EXPECT_NO_THROW(PsdMat(SymMat::diagonal({1.0, 0.0})));
  EXPECT_NO_THROW(PsdMat(SymMat::diagonal({1.0, -1e-12})));
  EXPECT_THROW(PsdMat(SymMat::diagonal({1.0, -1e-6})), DomainError);
}

TEST(Expm, ZeroAndDiagonal) {
  EXPECT_TRUE(expm(RMat::Zero(2, 2)).isApprox(RMat::Identity(2, 2), 1e-15));
  RMat d = RMat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const RMat e = expm(d);
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(2.0), 1e-13);
  EXPECT_EQ(e(0, 1), 0.0);
}

TEST(Expm, MatchesRk4) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const RMat a = random_matrix(rng, 4, 0.3);
    EXPECT_LT((expm(a) - rk4_expm(a, 40)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Expm, InverseAndCommutingProduct) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    RMat a = random_matrix(rng, 4);
    a *= 10.0 / a.norm();
    const RMat id = RMat::Identity(4, 4);
    const RMat ea = expm(a);
    EXPECT_LT((ea * expm((-a).eval()) - id).cwiseAbs().maxCoeff(), 1e-10);
    const RMat b = (0.3 * a + 0.1 * a * a / 10.0).eval();  // commutes with a
    const RMat lhs = expm((0.2 * (a + b)).eval());
    const RMat rhs = expm((0.2 * a).eval()) * expm((0.2 * b).eval());
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
  }
}

TEST(Expm, RejectsBadInput) {
  RMat a = RMat::Zero(2, 3);
  EXPECT_THROW(expm(a), ShapeError);
  RMat b = RMat::Zero(2, 2);
  b(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(expm(b), NumericError);
}

TEST(SqrtmPsd, KnownCases) {
  EXPECT_TRUE(sqrtm_psd(PsdMat(SymMat::identity(3))).matrix().isApprox(RMat::Identity(3, 3)));
  const SymMat s = sqrtm_psd(PsdMat(SymMat::diagonal({4.0, 9.0})));
  EXPECT_NEAR(s(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(s(1, 1), 3.0, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.0, 1e-15);
}

TEST(SqrtmPsd, CalibratedState) {
  const PsdMat sigma = table1_params().sigma0();
  const SymMat s = sqrtm_psd(sigma);
  EXPECT_LT((s.matrix() * s.matrix() - sigma.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<RMat> es(s.matrix());
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
}

TEST(SqrtmPsd, RandomSquaresBack) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const PsdMat a = random_psd(rng, 5);
    const SymMat s = sqrtm_psd(a);
    EXPECT_LT((s.matrix() * s.matrix() - a.matrix()).norm(), 1e-12 * std::max(1.0, a.matrix().norm()));
  }
}

TEST(LogmPath, ZeroGenerator) {
  const auto out = logm_path([](double) { return CMat::Identity(2, 2).eval(); }, 3.0, 8);
  EXPECT_EQ(out.trace, cplx(0.0, 0.0));
}

TEST(LogmPath, CommutingDiagonal) {
  const double tau = 5.0;
  auto f = [](double t) {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = std::exp(t * cplx(1.0, 2.0));
    m(1, 1) = std::exp(-t);
    return m;
  };
  const auto out = logm_path(f, tau, 3);  // steps turning by 10/3 rad force refinement
  EXPECT_NEAR(out.trace.real(), 0.0, 1e-12);
  EXPECT_NEAR(out.trace.imag(), 2.0 * tau, 1e-12);
  EXPECT_GT(out.steps, 3);
}

TEST(LogmPath, SingularPathThrows) {
  auto f = [](double t) {
    CMat m = CMat::Identity(1, 1);
    m(0, 0) = 1.0 - t;
    return m;
  };
  EXPECT_THROW(logm_path(f, 1.0, 4), SingularityError);
}
