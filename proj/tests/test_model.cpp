#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "wishfx/model.hpp"
#include "wishfx/model_io.hpp"

using namespace wishfx;
using namespace wishfx::testing;

TEST(WishartParams, Table1IsAdmissible) {
  const WishartParams p = table1_params();
  EXPECT_EQ(p.dim(), 2);
  EXPECT_TRUE(p.warnings().empty());
  EXPECT_FALSE(usd().warnings().empty());  // h < 0 is only a warning
}

TEST(WishartParams, HardConstraints) {
  const WishartParams p = table1_params();
  EXPECT_THROW(WishartParams(2.9, p.M(), p.Q(), p.R(), p.sigma0()), DomainError);
  EXPECT_NO_THROW(WishartParams(2.9, p.M(), p.Q(), p.R(), p.sigma0(), Validation::unchecked));
  const RMat big_r = 1.2 * RMat::Identity(2, 2);
  EXPECT_THROW(WishartParams(p.beta(), p.M(), p.Q(), big_r, p.sigma0()), DomainError);
  const RMat explosive = -p.M();
  EXPECT_FALSE(WishartParams(p.beta(), explosive, p.Q(), p.R(), p.sigma0()).warnings().empty());
}

TEST(Measure, NullProjectionAndUnitCase) {
  const WishartParams p = table1_params();
  CurrencySpec zero{"Z", SymMat(2), 0.0, PsdMat(SymMat(2))};
  EXPECT_EQ(to_measure(p, zero).M_eff(), p.M());

  const RMat m = mat2(-1.0, 0.2, 0.1, -0.5);
  WishartParams unit(3.0, m, RMat::Identity(2, 2), RMat::Identity(2, 2), PsdMat(SymMat::identity(2)));
  CurrencySpec one{"I", SymMat::identity(2), 0.0, PsdMat(SymMat(2))};
  EXPECT_TRUE(to_measure(unit, one).M_eff().isApprox(m - RMat::Identity(2, 2), 1e-15));
}

TEST(Measure, RetargetPathIndependence) {
  const WishartParams p = table1_params();
  const auto ctx_us = to_measure(p, usd());
  EXPECT_EQ(retarget(ctx_us, usd(), usd(), p).M_eff(), ctx_us.M_eff());
  const auto via = retarget(ctx_us, usd(), eur(), p);
  EXPECT_EQ(via.label(), "EUR");
  EXPECT_LT((via.M_eff() - to_measure(p, eur()).M_eff()).cwiseAbs().maxCoeff(), 1e-14);

  const auto cycle = retarget(retarget(retarget(ctx_us, usd(), eur(), p), eur(), jpy(), p), jpy(), usd(), p);
  EXPECT_LT((cycle.M_eff() - ctx_us.M_eff()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(retarget(ctx_us, eur(), usd(), p), DomainError);
}

TEST(Measure, Table1ExplicitEntries) {
  const WishartParams p = table1_params();
  const RMat qtr = p.Q().transpose() * p.R();
  const RMat a = usd().A.matrix();
  const RMat m = to_measure(p, usd()).M_eff();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k) s += qtr(i, k) * a(k, j);
      EXPECT_NEAR(m(i, j), p.M()(i, j) - s, 1e-15);
    }
}

TEST(QuantoDrift, Cases) {
  const PsdMat id(SymMat::identity(2));
  const CurrencySpec i{"I", SymMat::identity(2), 0.0, PsdMat(SymMat(2))};
  const CurrencySpec z{"Z", SymMat(2), 0.0, PsdMat(SymMat(2))};
  EXPECT_EQ(quanto_drift(FxPairSpec(i, i, 1.0), id), 0.0);
  EXPECT_DOUBLE_EQ(quanto_drift(FxPairSpec(i, z, 1.0), id), 2.0);

  const FxPairSpec pair = usd_eur();
  const RMat d = pair.diff(), s = table1_params().sigma0().matrix(), a = usd().A.matrix();
  double oracle = 0.0;
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      for (int r = 0; r < 2; ++r) oracle += d(p, q) * s(q, r) * a(r, p);
  EXPECT_NEAR(quanto_drift(pair, table1_params().sigma0()), oracle, 1e-15);
}

TEST(ModelIo, FileMatchesFixtureAndRoundTrips) {
  const ModelDoc doc = load_model(std::string(WISHFX_DATA_DIR) + "/table1.json");
  const WishartParams p = table1_params();
  EXPECT_EQ(doc.params.M(), p.M());
  EXPECT_EQ(doc.params.Q(), p.Q());
  EXPECT_EQ(doc.params.R(), p.R());
  EXPECT_EQ(doc.params.sigma0().sym(), p.sigma0().sym());
  EXPECT_EQ(doc.params.beta(), p.beta());
  EXPECT_EQ(doc.currency("USD").A, usd().A);
  EXPECT_EQ(doc.currency("EUR").H.sym(), eur().H.sym());

  const ModelDoc back = model_from_json(nlohmann::json::parse(model_to_json(doc).dump()));
  EXPECT_EQ(model_to_json(back), model_to_json(doc));
  EXPECT_EQ(back.params.M(), doc.params.M());
  EXPECT_EQ(back.currencies[1].h, doc.currencies[1].h);
}

TEST(ModelIo, Errors) {
  EXPECT_THROW(load_model("/nonexistent/params.json"), DataError);
  auto j = model_to_json(ModelDoc{table1_params(), {usd(), eur()}});
  j["beta"] = 2.5;
  EXPECT_THROW(model_from_json(j), DomainError);
  j["beta"] = 3.5;
  j["sigma0"][0][1] = 0.3;
  EXPECT_THROW(model_from_json(j), DataError);
  j["sigma0"][0][1] = 0.1708;
  j["currencies"][1]["label"] = "USD";
  EXPECT_THROW(model_from_json(j), DataError);
  const ModelDoc doc{table1_params(), {usd(), eur()}};
  EXPECT_THROW(doc.pair("USDEUR", 1.0), DataError);
  EXPECT_THROW(doc.pair("USD/GBP", 1.0), DataError);
  EXPECT_EQ(doc.pair("USD/EUR", 1.3).name(), "USD/EUR");
}
