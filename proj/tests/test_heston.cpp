#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "wishfx/fx_pricer.hpp"
#include "wishfx/heston.hpp"

using namespace wishfx;
using namespace wishfx::testing;

TEST(HestonNest, ReadOff) {
  RMat m(1, 1), q(1, 1), r(1, 1), s(1, 1), a(1, 1);
  m << -0.4;
  q << 0.3;
  r << -0.7;
  s << 0.05;
  a << 0.9;
  const WishartParams p(2.2, m, q, r, PsdMat(SymMat::from_lower(s)));
  const CurrencySpec i{"i", SymMat::from_lower(a), 0.0, PsdMat(SymMat(1))};
  const CurrencySpec j{"j", SymMat(1), 0.0, PsdMat(SymMat(1))};
  const DiagonalNest n = nest_from_diagonal(p, FxPairSpec(i, j, 1.0));
  ASSERT_EQ(n.factors.size(), 1u);
  EXPECT_EQ(n.factors[0].v0, 0.05);
  EXPECT_EQ(n.factors[0].sigma_v(), 0.6);
  EXPECT_EQ(n.factors[0].m, -0.4);
  EXPECT_NEAR(n.kappa_theta(n.factors[0]), 2.2 * 0.09, 1e-15);

  EXPECT_EQ(nest_from_diagonal(diagonal_params(), diagonal_pair()).factors.size(), 2u);
  EXPECT_THROW(nest_from_diagonal(table1_params(), usd_eur()), DomainError);
}

TEST(HestonNest, TrivialTransform) {
  DiagonalNest n = nest_from_diagonal(diagonal_params(), diagonal_pair());
  n.h_dom = n.h_for = 0.0;
  for (auto& f : n.factors) f.h_dom = f.h_for = 0.0;
  EXPECT_NEAR(std::abs(heston_mgf_oracle(n, 0.0, 3.0, 0.4) - 1.0), 0.0, 1e-14);
}

TEST(HestonNest, TwoFormulationsAgree) {
  DiagonalNest n = nest_from_diagonal(diagonal_params(), diagonal_pair());
  n.factors.resize(1);
  n.factors[0].rho = 0.0;
  for (cplx w : {cplx(0.5, 0), cplx(1, 2), cplx(0, 5)})
    for (double tau : {0.5, 2.0}) {
      const cplx a = heston_mgf_oracle(n, w, tau, 0.1), b = heston_mgf_original(n, w, tau, 0.1);
      EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(a));
    }
}

TEST(HestonNest, MatchesMatrixTransform) {
  const WishartParams p = diagonal_params();
  const FxPairSpec pair = diagonal_pair();
  const DiagonalNest n = nest_from_diagonal(p, pair);
  const double x = std::log(pair.spot);
  for (cplx w : {cplx(0.5, 0), cplx(1, 2), cplx(0, 5)})
    for (double tau : {0.5, 2.0}) {
      const cplx a = fx_mgf(pair, p, w, tau, x, p.sigma0());
      const cplx b = heston_mgf_oracle(n, w, tau, x);
      EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(b)) << w << " " << tau;
    }
}

TEST(HestonNest, PricesAgree) {
  const WishartParams p = diagonal_params();
  const FxPairSpec pair = diagonal_pair();
  const DiagonalNest n = nest_from_diagonal(p, pair);
  const double x = std::log(pair.spot);
  for (double tau : {0.5, 2.0}) {
    const MgfFn g = [&](cplx w) { return heston_mgf_oracle(n, w, tau, x); };
    for (double k : {1.0, 1.2, 1.4}) {
      const FourierSlice slice(g, 1.5, {std::log(k)}, 1e-9);
      EXPECT_NEAR(price_call_fourier(pair, p, k, tau), slice.value(std::log(k)), 1e-6);
    }
  }
}
