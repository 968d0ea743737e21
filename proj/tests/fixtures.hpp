#pragma once

// Shared parameter sets for the test suite.

#include <random>

#include "wishfx/model.hpp"

namespace wishfx::testing {

inline RMat mat2(double a, double b, double c, double d) {
  RMat m(2, 2);
  m << a, b, c, d;
  return m;
}

inline SymMat sym2(double a, double b, double d) { return SymMat::from_lower(mat2(a, b, b, d)); }

// Calibrated two-factor parameter set (USD/EUR).
inline WishartParams table1_params() {
  return WishartParams(3.1442, mat2(-0.5213, -0.3382, -0.4940, -0.4389), mat2(0.2184, 0.0957, 0.2483, 0.3681),
                       mat2(-0.5417, 0.1899, -0.1170, -0.4834), PsdMat(sym2(0.1688, 0.1708, 0.3169)));
}

inline CurrencySpec usd() {
  return {"USD", sym2(0.7764, 0.4837, 0.9639), -0.2218, PsdMat(sym2(0.2725, 0.0804, 0.4726))};
}

inline CurrencySpec eur() {
  return {"EUR", sym2(0.6679, 0.6277, 0.8520), -0.1862, PsdMat(sym2(0.1841, 0.0155, 0.4761))};
}

// Third currency for triangular tests; not part of the calibrated set.
inline CurrencySpec jpy() {
  return {"JPY", sym2(0.55, 0.40, 0.70), -0.2050, PsdMat(sym2(0.2000, 0.0500, 0.3000))};
}

inline constexpr double kSpotUsdEur = 1.3080;

inline FxPairSpec usd_eur() { return FxPairSpec(usd(), eur(), kSpotUsdEur); }

// Same model with constant rates (H = 0, h set to the Table-1 short rates at Sigma(0)).
inline CurrencySpec constant_rate(const CurrencySpec& c, const PsdMat& sigma) {
  return {c.label, c.A, short_rate(c, sigma), PsdMat(SymMat(c.dim()))};
}

inline FxPairSpec usd_eur_const_rates() {
  const auto s0 = table1_params().sigma0();
  return FxPairSpec(constant_rate(usd(), s0), constant_rate(eur(), s0), kSpotUsdEur);
}

// Diagonal two-factor model (independent Heston factors).
inline WishartParams diagonal_params() {
  return WishartParams(3.5, mat2(-0.6, 0.0, 0.0, -0.3), mat2(0.25, 0.0, 0.0, 0.35), mat2(-0.5, 0.0, 0.0, 0.3),
                       PsdMat(SymMat::diagonal({0.12, 0.25})));
}

inline FxPairSpec diagonal_pair() {
  CurrencySpec d{"USD", SymMat::diagonal({0.7, 0.9}), 0.01, PsdMat(SymMat::diagonal({0.05, 0.03}))};
  CurrencySpec f{"EUR", SymMat::diagonal({0.5, 0.6}), 0.005, PsdMat(SymMat::diagonal({0.02, 0.04}))};
  return FxPairSpec(d, f, 1.2);
}

inline RMat random_matrix(std::mt19937_64& rng, int d, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  RMat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = n(rng);
  return m;
}

inline SymMat random_sym(std::mt19937_64& rng, int d, double scale = 1.0) {
  const RMat m = random_matrix(rng, d, scale);
  return SymMat::from_lower(0.5 * (m + m.transpose()));
}

inline PsdMat random_psd(std::mt19937_64& rng, int d, double scale = 1.0) {
  const RMat m = random_matrix(rng, d, scale);
  return PsdMat(SymMat::from_lower(m * m.transpose()));
}

}  // namespace wishfx::testing
