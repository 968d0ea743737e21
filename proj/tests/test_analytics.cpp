#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "wishfx/analytics.hpp"
#include "wishfx/heston.hpp"

using namespace wishfx;
using namespace wishfx::testing;

namespace {

CurrencySpec cur(const std::string& label, const SymMat& a, const PsdMat& h) { return {label, a, 0.01, h}; }

}  // namespace

TEST(InstantVar, TrivialCases) {
  const PsdMat s(SymMat::diagonal({2.0, 3.0}));
  const CurrencySpec z = cur("Z", SymMat(2), PsdMat(SymMat(2)));
  const CurrencySpec i = cur("I", SymMat::identity(2), PsdMat(SymMat(2)));
  EXPECT_EQ(fx_instant_var(FxPairSpec(i, i, 1.0), s), 0.0);
  EXPECT_DOUBLE_EQ(fx_instant_var(FxPairSpec(i, z, 1.0), s), 5.0);
  EXPECT_DOUBLE_EQ(fx_instant_cov(FxPairSpec(i, z, 1.0), FxPairSpec(i, z, 1.0), s), 5.0);
}

TEST(InstantVar, EigenExpansionOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const PsdMat s = random_psd(rng, 3);
    const SymMat d = random_sym(rng, 3);
    const FxPairSpec pair(cur("A", d, PsdMat(SymMat(3))), cur("B", SymMat(3), PsdMat(SymMat(3))), 1.0);
    // Tr[D S D] = sum_k lambda_k |D u_k|^2 with S = sum_k lambda_k u_k u_k'.
    Eigen::SelfAdjointEigenSolver<RMat> es(s.matrix());
    double oracle = 0.0;
    for (int k = 0; k < 3; ++k)
      oracle += std::max(es.eigenvalues()(k), 0.0) * (d.matrix() * es.eigenvectors().col(k)).squaredNorm();
    const double v = fx_instant_var(pair, s);
    EXPECT_NEAR(v, oracle, 1e-12 * std::max(1.0, oracle));
    EXPECT_GE(v, -1e-14);
  }
}

TEST(InstantVar, ShiftInvariance) {
  std::mt19937_64 rng(9);
  const PsdMat s = random_psd(rng, 3);
  const SymMat ai = random_sym(rng, 3), aj = random_sym(rng, 3), c = random_sym(rng, 3);
  const PsdMat z(SymMat(3));
  const double v1 = fx_instant_var(FxPairSpec(cur("i", ai, z), cur("j", aj, z), 1.0), s);
  const double v2 = fx_instant_var(FxPairSpec(cur("i", ai + c, z), cur("j", aj + c, z), 1.0), s);
  EXPECT_NEAR(v1, v2, 1e-12 * std::max(1.0, v1));
}

TEST(InstantCov, CauchySchwarzSweep) {
  std::mt19937_64 rng(13);
  const PsdMat z(SymMat(3));
  for (int t = 0; t < 1000; ++t) {
    const PsdMat s = random_psd(rng, 3);
    const CurrencySpec i = cur("i", random_sym(rng, 3), z), j = cur("j", random_sym(rng, 3), z),
                       l = cur("l", random_sym(rng, 3), z);
    const FxPairSpec ij(i, j, 1.0), il(i, l, 1.0);
    const double vij = fx_instant_var(ij, s), vil = fx_instant_var(il, s), c = fx_instant_cov(ij, il, s);
    EXPECT_GE(vij * vil - c * c, -1e-12 * std::max(1.0, vij * vil));
  }
}

TEST(SkewCorr, ZeroCorrelationAndScalarReduction) {
  const WishartParams p = table1_params();
  const WishartParams r0(p.beta(), p.M(), p.Q(), RMat::Zero(2, 2), p.sigma0());
  EXPECT_EQ(skew_corr(usd_eur(), r0, p.sigma0()), 0.0);

  // d = 1: corr(log S, V) = sign(D^3 Q R)/(|D|^3 |Q|) ... = rho * sign(Q)
  RMat m1(1, 1), q1(1, 1), rr(1, 1), s1(1, 1);
  m1 << -0.5;
  q1 << 0.3;
  rr << -0.6;
  s1 << 0.04;
  const WishartParams p1(2.5, m1, q1, rr, PsdMat(SymMat::from_lower(s1)));
  RMat a(1, 1);
  a << 0.8;
  const FxPairSpec pair(cur("i", SymMat::from_lower(a), PsdMat(SymMat(1))), cur("j", SymMat(1), PsdMat(SymMat(1))),
                        1.0);
  EXPECT_NEAR(skew_corr(pair, p1, p1.sigma0()), -0.6, 1e-14);
  // The nested Heston factor carries the same correlation.
  EXPECT_EQ(nest_from_diagonal(p1, pair).factors[0].rho, -0.6);
}

TEST(SkewCorr, Table1InRange) {
  const WishartParams p = table1_params();
  const double c = skew_corr(usd_eur(), p, p.sigma0());
  EXPECT_GE(c, -1.0);
  EXPECT_LE(c, 1.0);
}

TEST(RateCorr, DegenerateAndZeroCorrelation) {
  const WishartParams p = table1_params();
  CurrencySpec dom = usd();
  dom.H = PsdMat(SymMat(2));
  EXPECT_THROW(rate_fx_corr(FxPairSpec(dom, eur(), 1.3), p, p.sigma0()), DegenerateError);
  EXPECT_THROW(rate_var_corr(FxPairSpec(dom, eur(), 1.3), p, p.sigma0()), DegenerateError);
  EXPECT_THROW(rate_var_corr(FxPairSpec(usd(), usd(), 1.0), p, p.sigma0()), DegenerateError);

  const WishartParams r0(p.beta(), p.M(), p.Q(), RMat::Zero(2, 2), p.sigma0());
  const auto rep = rate_fx_corr(usd_eur(), r0, p.sigma0());
  EXPECT_EQ(rep.covar, 0.0);
  EXPECT_EQ(rep.corr, 0.0);
}

TEST(RateCorr, RandomDrawsStayInRange) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const int d = 2 + t % 3;
    RMat r = random_matrix(rng, d);
    r *= 0.99 * u(rng) / std::max(1.0, spectral_norm_sym(r * r.transpose()) > 0 ? std::sqrt(spectral_norm_sym(r * r.transpose())) : 1.0);
    const WishartParams p(d + 1.5, -RMat::Identity(d, d), random_matrix(rng, d, 0.3), r, random_psd(rng, d));
    const CurrencySpec i{"i", random_sym(rng, d), 0.01, random_psd(rng, d)};
    const CurrencySpec j{"j", random_sym(rng, d), 0.01, random_psd(rng, d)};
    const CurrencySpec l{"l", random_sym(rng, d), 0.01, random_psd(rng, d)};
    const FxPairSpec ij(i, j, 1.0), il(i, l, 1.0);
    const PsdMat& s = p.sigma0();
    const double vij = fx_instant_var(ij, s), vil = fx_instant_var(il, s), c = fx_instant_cov(ij, il, s);
    EXPECT_GE(vij * vil - c * c, -1e-12 * std::max(1.0, vij * vil));
    for (double corr : {skew_corr(ij, p, s), rate_fx_corr(ij, p, s).corr, rate_var_corr(ij, p, s).corr}) {
      EXPECT_LE(std::abs(corr), 1.0 + 1e-12);
    }
  }
}
