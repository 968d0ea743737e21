#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "wishfx/analytics.hpp"
#include "wishfx/mc.hpp"
#include "wishfx/rates.hpp"

using namespace wishfx;
using namespace wishfx::testing;

namespace {

SimConfig config(long n, std::uint64_t seed = 11) {
  SimConfig c;
  c.n_paths = n;
  c.seed = seed;
  return c;
}

PathBundle run(const WishartParams& p, const std::vector<FxPairSpec>& pairs, const CurrencySpec& measure, double t,
               const SimConfig& cfg) {
  return simulate(p, {usd(), eur(), jpy()}, pairs, to_measure(p, measure), t, cfg);
}

}  // namespace

TEST(Simulate, SameSeedSameNumbersAcrossThreadCounts) {
  const auto p = table1_params();
  set_num_threads(1);
  const auto a = run(p, {usd_eur()}, usd(), 0.5, config(3000));
  set_num_threads(3);
  const auto b = run(p, {usd_eur()}, usd(), 0.5, config(3000));
  set_num_threads(0);
  EXPECT_EQ(a.log_fx, b.log_fx);
  EXPECT_EQ(a.int_rate, b.int_rate);
  const auto c = run(p, {usd_eur()}, usd(), 0.5, config(3000, 12));
  EXPECT_NE(a.log_fx, c.log_fx);
}

TEST(Simulate, AntitheticPairsMirrorTheFirstStep) {
  const auto p = table1_params();
  SimConfig cfg = config(4);
  cfg.n_steps_per_year = 1000;
  const auto b = run(p, {usd_eur()}, usd(), 1e-3, cfg);
  EXPECT_EQ(b.n_steps, 1);
  const double drift = 0.5 * (b.log_fx(0, 0) + b.log_fx(1, 0)) - std::log(kSpotUsdEur);
  EXPECT_LT(std::abs(drift), 1e-3);
  EXPECT_GT(std::abs(b.log_fx(0, 0) - b.log_fx(1, 0)), 0.0);
}

TEST(Simulate, RejectsBadInput) {
  const auto p = table1_params();
  EXPECT_THROW(run(p, {usd_eur()}, usd(), 0.0, config(10)), DomainError);
  EXPECT_THROW(run(p, {usd_eur()}, usd(), 1.0, config(3)), DomainError);
  CurrencySpec gbp{"GBP", SymMat::identity(2), 0.0, PsdMat(SymMat(2))};
  EXPECT_THROW(simulate(p, {usd()}, {}, to_measure(p, gbp), 1.0, config(10)), DomainError);
  // Measure context from another parameter set.
  EXPECT_THROW(simulate(p, {usd()}, {}, to_measure(diagonal_params(), usd()), 1.0, config(10)), DomainError);
}

TEST(Simulate, MeanMatchesMomentOde) {
  const auto p = table1_params();
  SimConfig cfg = config(40000);
  cfg.store_sigma = true;
  cfg.n_steps_per_year = 252;
  const auto m = to_measure(p, usd());
  const auto b = simulate(p, {usd()}, {}, m, 1.0, cfg);
  EXPECT_GT(b.clamp_events, 0);
  const RMat oracle = wishart_mean_rk4(p, m, 1.0, 400);
  for (int k = 0; k < 4; ++k) {
    const auto est = mc_mean(b, [&](long i) { return b.sigma_T(i, k); });
    EXPECT_NEAR(est.mean, oracle(k % 2, k / 2), 3.0 * est.std_err) << "entry " << k;
  }
}

TEST(Simulate, DiscountedBondMatchesTransform) {
  const auto p = table1_params();
  const auto b = run(p, {}, usd(), 2.0, config(20000));
  const auto est = mc_mean(b, [&](long i) { return std::exp(-b.int_rate(i, b.currency_index("USD"))); });
  EXPECT_NEAR(est.mean, zcb_price(usd(), p, p.sigma0(), 2.0), 3.0 * est.std_err);
}

TEST(Simulate, DiscountedFxIsForeignBond) {
  const auto p = table1_params();
  const auto b = run(p, {usd_eur()}, usd(), 1.0, config(20000));
  const auto est = mc_mean(b, [&](long i) { return std::exp(b.log_fx(i, 0) - b.int_rate(i, 0)); });
  EXPECT_NEAR(est.mean, kSpotUsdEur * zcb_price(eur(), p, p.sigma0(), 1.0), 3.0 * est.std_err);
}

TEST(Simulate, FrozenFactorLimit) {
  // Q tiny, M = 0: S stays at S(0) and log S has variance Tr[D S D] T.
  const RMat q = 1e-6 * RMat::Identity(2, 2);
  const WishartParams p(3.5, RMat::Zero(2, 2), q, RMat::Zero(2, 2), table1_params().sigma0());
  const auto b = run(p, {usd_eur()}, usd(), 1.0, config(20000));
  const Eigen::VectorXd x = b.log_fx.col(0);
  const double var = (x.array() - x.mean()).square().sum() / (x.size() - 1);
  const double exact = fx_instant_var(usd_eur(), p.sigma0());
  EXPECT_NEAR(var, exact, 3.0 * std::sqrt(2.0 / x.size()) * exact);
}

TEST(McPrice, StrikeLimits) {
  const auto p = table1_params();
  const auto b = run(p, {usd_eur()}, usd(), 1.0, config(2000));
  const auto fwd = mc_mean(b, [&](long i) { return std::exp(b.log_fx(i, 0) - b.int_rate(i, 0)); });
  EXPECT_DOUBLE_EQ(mc_price_call(b, 0, 0.0, 0).mean, fwd.mean);
  EXPECT_EQ(mc_price_call(b, 0, 1e6, 0).mean, 0.0);
}

TEST(McPrice, HalvingStepMovesPriceLessThanOneStdErr) {
  const auto p = table1_params();
  SimConfig fine = config(40000);
  fine.n_steps_per_year = 126;
  const auto a = mc_price_call(run(p, {usd_eur()}, usd(), 1.0, config(40000)), 0, 1.30, 0);
  const auto b = mc_price_call(run(p, {usd_eur()}, usd(), 1.0, fine), 0, 1.30, 0);
  EXPECT_LT(std::abs(a.mean - b.mean), std::hypot(a.std_err, b.std_err));
}

TEST(Simulate, TriangularIdentityHoldsPathwise) {
  const auto p = table1_params();
  const FxPairSpec uj(usd(), jpy(), 0.9), je(jpy(), eur(), kSpotUsdEur / 0.9);
  for (const auto& m : {usd(), eur(), jpy()}) {
    const auto b = run(p, {uj, je, usd_eur()}, m, 1.0, config(200));
    for (long i = 0; i < b.n_paths; ++i)
      ASSERT_NEAR(b.log_fx(i, 0) + b.log_fx(i, 1), b.log_fx(i, 2), 1e-12) << m.label << " path " << i;
  }
}

TEST(Simulate, CallMatchesFourierUnderBothMeasures) {
  const auto p = table1_params();
  const double tau = 1.0, strike = 1.35;
  const double ref = price_call_fourier(usd_eur(), p, strike, tau);

  const auto bd = run(p, {usd_eur()}, usd(), tau, config(40000));
  const auto dom = mc_price_call(bd, 0, strike, bd.currency_index("USD"));
  EXPECT_NEAR(dom.mean, ref, 3.0 * dom.std_err);

  // Under the foreign measure: C = S0 E^{EUR}[e^{-int r^EUR} (1 - K/S)^+].
  const auto bf = run(p, {usd_eur()}, eur(), tau, config(40000, 99));
  const int e = bf.currency_index("EUR");
  const auto fgn = mc_mean(bf, [&](long i) {
    return kSpotUsdEur * std::exp(-bf.int_rate(i, e)) * std::max(1.0 - strike * std::exp(-bf.log_fx(i, 0)), 0.0);
  });
  EXPECT_NEAR(fgn.mean, ref, 3.0 * fgn.std_err);
}

TEST(Simulate, InstantaneousCorrelationsMatchAnalytics) {
  const auto p = table1_params();
  const auto pair = usd_eur();
  const long n = 100000;
  const Eigen::MatrixXd inc = instant_increments(p, pair, p.sigma0(), 1e-4, n, 5);
  auto corr = [&](int a, int b) {
    const Eigen::VectorXd x = inc.col(a).array() - inc.col(a).mean();
    const Eigen::VectorXd y = inc.col(b).array() - inc.col(b).mean();
    return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
  };
  auto check = [&](double est, double exact) {
    const double se = (1.0 - exact * exact) / std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(est, exact, 3.0 * se);
  };
  check(corr(0, 1), rate_fx_corr(pair, p, p.sigma0()).corr);
  check(corr(0, 2), skew_corr(pair, p, p.sigma0()));
  check(corr(1, 2), rate_var_corr(pair, p, p.sigma0()).corr);
  const double var_fx = 1e4 * (inc.col(0).array() - inc.col(0).mean()).square().mean();
  const double exact = fx_instant_var(pair, p.sigma0());
  EXPECT_NEAR(var_fx, exact, 3.0 * std::sqrt(2.0 / n) * exact);
}

TEST(WishartMean, StationaryLimitSolvesLyapunov) {
  const auto p = diagonal_params();
  const auto m = to_measure(p, diagonal_pair().dom);
  const RMat e = wishart_mean_rk4(p, m, 60.0, 6000);
  const RMat resid = p.beta() * p.QtQ() + m.M_eff() * e + e * m.M_eff().transpose();
  EXPECT_LT(resid.cwiseAbs().maxCoeff(), 1e-8);
}
