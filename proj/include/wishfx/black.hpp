#pragma once

// Black-Scholes on the forward, its variance derivatives, implied volatility
// and delta/strike conversion.

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "wishfx/errors.hpp"

namespace wishfx {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

inline double norm_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("norm_inv: probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

/// Black call (or put) price in terms of total variance v = sigma^2 tau.
inline double black_price_var(double forward, double strike, double v, double df, bool call = true) {
  if (!(forward > 0.0) || !(strike >= 0.0) || !(v >= 0.0)) throw DomainError("black: invalid inputs");
  const double intrinsic_call = std::max(forward - strike, 0.0);
  if (strike == 0.0) return call ? df * forward : 0.0;
  if (v == 0.0) return df * (call ? intrinsic_call : std::max(strike - forward, 0.0));
  const double s = std::sqrt(v);
  const double d1 = (std::log(forward / strike) + 0.5 * v) / s;
  const double d2 = d1 - s;
  if (call) return df * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
  return df * (strike * norm_cdf(-d2) - forward * norm_cdf(-d1));
}

inline double black_price(double forward, double strike, double sigma, double tau, double df, bool call = true) {
  return black_price_var(forward, strike, sigma * sigma * tau, df, call);
}

/// d/dv of the Black call price (v = total variance).
inline double black_dv(double forward, double strike, double v, double df) {
  const double s = std::sqrt(v);
  const double d1 = (std::log(forward / strike) + 0.5 * v) / s;
  return df * forward * norm_pdf(d1) / (2.0 * s);
}

/// Black implied volatility of a call price. Newton on sigma, falling back to
/// bisection whenever a step leaves the current bracket.
inline double implied_vol(double price, double forward, double strike, double tau, double df) {
  if (!(tau > 0.0) || !(df > 0.0) || !(forward > 0.0) || !(strike > 0.0))
    throw DomainError("implied_vol: invalid market inputs");
  const double lower = df * std::max(forward - strike, 0.0);
  const double upper = df * forward;
  const double slack = 1e-14 * upper;
  if (!(price >= lower - slack && price <= upper + slack))
    throw DomainError("implied_vol: price outside no-arbitrage bounds");
  if (price <= lower + slack) return 0.0;

  double lo = 0.0, hi = 1.0;
  while (black_price(forward, strike, hi, tau, df) < price) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) throw DomainError("implied_vol: price too close to the upper bound");
  }
  // Start at the inflection point of price(sigma), where Newton is monotone.
  const double m = std::log(forward / strike);
  double sigma = std::clamp(std::sqrt(2.0 * std::abs(m) / tau), lo + 1e-3 * (hi - lo), hi);
  if (m == 0.0) sigma = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double diff = black_price(forward, strike, sigma, tau, df) - price;
    if (std::abs(diff) < 1e-14 * std::max(1.0, upper)) return sigma;
    if (diff > 0.0)
      hi = sigma;
    else
      lo = sigma;
    const double vega = black_dv(forward, strike, sigma * sigma * tau, df) * 2.0 * sigma * tau;
    double next = sigma - diff / vega;
    if (!(vega > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-16) return next;
    sigma = next;
  }
  return sigma;
}

/// Spot-delta (premium unadjusted, forward quoted) to strike. Positive delta
/// denotes a call, negative a put.
inline double delta_to_strike(double delta, double forward, double vol, double tau) {
  const double ad = std::abs(delta);
  if (!(ad > 0.0 && ad < 1.0)) throw DomainError("delta_to_strike: |delta| must lie in (0, 1)");
  if (!(forward > 0.0) || !(vol > 0.0) || !(tau > 0.0)) throw DomainError("delta_to_strike: invalid inputs");
  const double sd = vol * std::sqrt(tau);
  const double z = norm_inv(ad);
  const double shift = delta > 0.0 ? -sd * z : sd * z;
  return forward * std::exp(shift + 0.5 * sd * sd);
}

}  // namespace wishfx
