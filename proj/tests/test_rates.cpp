#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "wishfx/rates.hpp"

using namespace wishfx;
using namespace wishfx::testing;

namespace {

CurrencySpec flat_rate(double h) { return {"FLAT", usd().A, h, PsdMat(SymMat(2))}; }

}  // namespace

TEST(Zcb, TrivialCases) {
  const WishartParams p = table1_params();
  EXPECT_EQ(zcb_price(usd(), p, p.sigma0(), 0.0), 1.0);
  EXPECT_NEAR(zcb_price(flat_rate(0.03), p, p.sigma0(), 4.0), std::exp(-0.12), 1e-14);
  const YieldCurve flat = yield_curve(flat_rate(0.03), p, p.sigma0(), {0.5, 1.0, 10.0});
  for (double y : flat.yields) EXPECT_NEAR(y, 0.03, 1e-13);
}

TEST(Zcb, ShortRateLimit) {
  const WishartParams p = table1_params();
  const RMat s = p.sigma0().matrix();
  for (const auto& c : {usd(), eur()}) {
    // Y(tau) = r + tau * mu_r / 2 + O(tau^2), mu_r the Q^c drift of r.
    const RMat m = to_measure(p, c).M_eff();
    const double mu = trace_prod(c.H.matrix(), (p.beta() * p.QtQ() + m * s + s * m.transpose()).eval());
    const double r = short_rate(c, p.sigma0());
    EXPECT_NEAR(yield_curve(c, p, p.sigma0(), {1e-5}).yields[0], r, 1e-6);
    EXPECT_NEAR(yield_curve(c, p, p.sigma0(), {1e-4}).yields[0], r + 0.5e-4 * mu, 1e-9);
  }
}

TEST(Zcb, PositiveRegimeIsBoundedAndDecreasing) {
  const WishartParams p = table1_params();
  CurrencySpec c = usd();
  c.h = 0.01;
  double prev = 1.0;
  for (double t = 0.5; t <= 20.0; t += 0.5) {
    const double px = zcb_price(c, p, p.sigma0(), t);
    EXPECT_GT(px, 0.0);
    EXPECT_LE(px, prev);
    prev = px;
  }
}

TEST(Zcb, MatchesOmegaZeroFxTransform) {
  const WishartParams p = table1_params();
  for (double t : {1.0, 7.0}) {
    const double a = zcb_price(usd(), p, p.sigma0(), t);
    const double b = fx_mgf(usd_eur(), p, 0.0, t, 0.0, p.sigma0()).real();
    EXPECT_NEAR(a, b, 1e-12 * a);
  }
}

TEST(YieldCurveType, Validation) {
  EXPECT_NO_THROW((YieldCurve{{1.0, 2.0}, {0.01, 0.02}}.validate()));
  EXPECT_THROW((YieldCurve{{1.0, 1.0}, {0.01, 0.02}}.validate()), DataError);
  EXPECT_THROW((YieldCurve{{1.0}, {0.01, 0.02}}.validate()), DataError);
}

TEST(Caplet, DeterministicRates) {
  const WishartParams p = table1_params();
  const double h = 0.02, t0 = 1.0, t1 = 1.5, n = 100.0;
  for (double k : {0.0, 0.01, 0.03}) {
    const double gross = 1.0 + 0.5 * k;
    const double expect = n * gross * std::exp(-h * t0) * std::max(1.0 / gross - std::exp(-h * 0.5), 0.0);
    EXPECT_NEAR(caplet_price(flat_rate(h), p, p.sigma0(), t0, t1, k, n), expect, 2e-6 * n) << k;
  }
}

TEST(Caplet, MonotoneAndConvexInStrike) {
  const WishartParams p = table1_params();
  CurrencySpec c = usd();
  c.h = -0.2218;
  std::vector<double> px;
  for (double k = -0.01; k <= 0.06 + 1e-12; k += 0.01) px.push_back(caplet_price(c, p, p.sigma0(), 1.0, 1.5, k, 1.0));
  for (std::size_t i = 1; i < px.size(); ++i) EXPECT_LE(px[i], px[i - 1] + 1e-12);
  for (std::size_t i = 1; i + 1 < px.size(); ++i) EXPECT_GE(px[i + 1] - 2 * px[i] + px[i - 1], -1e-9);
  EXPECT_GE(px.back(), 0.0);
}

TEST(Cap, Additivity) {
  const WishartParams p = table1_params();
  EXPECT_EQ(cap_price(CapSpec::strip(1.0, 0.5, 0, 0.02), usd(), p, p.sigma0()), 0.0);
  const double one = cap_price(CapSpec::strip(1.0, 0.5, 1, 0.02), usd(), p, p.sigma0());
  EXPECT_EQ(one, caplet_price(usd(), p, p.sigma0(), 1.0, 1.5, 0.02, 1.0));
  const CapSpec four = CapSpec::strip(0.5, 0.5, 4, 0.02);
  const auto items = caplet_prices(four, usd(), p, p.sigma0());
  double sum = 0.0;
  for (double x : items) sum += x;
  EXPECT_NEAR(cap_price(four, usd(), p, p.sigma0()), sum, 1e-14);

  CapSpec bad = four;
  bad.pay_dates[1] += 0.1;
  EXPECT_THROW(bad.validate(), DataError);
}
