#pragma once

// Zero-coupon bonds, yield curves and caps in one currency under its own
// risk-neutral measure.

#include <cmath>
#include <vector>

#include "wishfx/fx_pricer.hpp"
#include "wishfx/transform.hpp"

namespace wishfx {

struct YieldCurve {
  std::vector<double> tenors;
  std::vector<double> yields;  // continuously compounded

  void validate() const {
    if (tenors.size() != yields.size()) throw DataError("YieldCurve: tenors and yields differ in length");
    for (std::size_t i = 0; i < tenors.size(); ++i) {
      if (!(tenors[i] > 0.0)) throw DataError("YieldCurve: tenors must be positive");
      if (i > 0 && !(tenors[i] > tenors[i - 1])) throw DataError("YieldCurve: tenors must be strictly increasing");
      if (!std::isfinite(yields[i])) throw DataError("YieldCurve: non-finite yield");
    }
  }
};

inline double zcb_price(const CurrencySpec& cur, const WishartParams& p, const PsdMat& sigma, double tau) {
  if (!(tau >= 0.0)) throw DomainError("zcb_price: tau must be >= 0");
  return std::exp(zcb_transform(cur, p, tau).exponent(sigma.matrix()).real());
}

inline YieldCurve yield_curve(const CurrencySpec& cur, const WishartParams& p, const PsdMat& sigma,
                              const std::vector<double>& tenors) {
  YieldCurve yc{tenors, {}};
  yc.yields.resize(tenors.size());
  for (double t : tenors)
    if (!(t > 0.0)) throw DomainError("yield_curve: tenors must be positive");
  parallel_for(static_cast<long>(tenors.size()), [&](long i) {
    yc.yields[i] = -zcb_transform(cur, p, tenors[i]).exponent(sigma.matrix()).real() / tenors[i];
  });
  return yc;
}

/// Caplet on the simple rate over [t_reset, t_pay], paid at t_pay, written as
/// N(1+dK) puts on P(t_reset, t_pay) struck at 1/(1+dK). The put is inverted
/// from the log-bond transform with damping -cfg.alpha (needs alpha > 1).
inline double caplet_price(const CurrencySpec& cur, const WishartParams& p, const PsdMat& sigma, double t_reset,
                           double t_pay, double strike_rate, double notional, const FourierConfig& cfg = {}) {
  cfg.validate();
  if (!(t_reset >= 0.0 && t_pay > t_reset)) throw DomainError("caplet_price: need 0 <= t_reset < t_pay");
  if (!(cfg.alpha > 1.0)) throw DomainError("caplet_price: put damping requires alpha > 1");
  if (!(notional > 0.0)) throw DomainError("caplet_price: notional must be positive");
  const double accrual = t_pay - t_reset;
  const double gross = 1.0 + accrual * strike_rate;
  if (!(gross > 0.0)) throw DomainError("caplet_price: 1 + accrual * strike must be positive");
  const double k = -std::log(gross);

  const MgfFn g = [&cur, &p, &sigma, t_reset, t_pay](cplx w) {
    return logbond_mgf(cur, p, w, t_reset, t_pay, sigma);
  };
  const double scale = notional * gross;
  const FourierSlice slice(g, -cfg.alpha, {k}, 1e-9 / scale);
  return finalize_price(scale * slice.value(k), "caplet_price");
}

struct CapSpec {
  std::vector<double> reset_dates;
  std::vector<double> pay_dates;
  double notional = 1.0;
  double strike_rate = 0.0;
  double tau_accrual = 0.0;

  void validate() const {
    if (reset_dates.size() != pay_dates.size()) throw DataError("CapSpec: reset and pay dates differ in length");
    if (!(notional > 0.0) || !(tau_accrual > 0.0)) throw DataError("CapSpec: notional and accrual must be positive");
    for (std::size_t i = 0; i < reset_dates.size(); ++i) {
      if (!(reset_dates[i] >= 0.0 && pay_dates[i] > reset_dates[i])) throw DataError("CapSpec: bad period");
      if (std::abs(pay_dates[i] - reset_dates[i] - tau_accrual) > 1e-9)
        throw DataError("CapSpec: period length differs from the accrual");
      if (i > 0 && std::abs(reset_dates[i] - pay_dates[i - 1]) > 1e-9)
        throw DataError("CapSpec: periods must be contiguous");
    }
  }

  // Contiguous periods start, start+accrual, ..., start+n*accrual.
  static CapSpec strip(double start, double accrual, int n, double strike_rate, double notional = 1.0) {
    CapSpec c;
    for (int i = 0; i < n; ++i) {
      c.reset_dates.push_back(start + i * accrual);
      c.pay_dates.push_back(start + (i + 1) * accrual);
    }
    c.notional = notional;
    c.strike_rate = strike_rate;
    c.tau_accrual = accrual;
    return c;
  }
};

inline std::vector<double> caplet_prices(const CapSpec& spec, const CurrencySpec& cur, const WishartParams& p,
                                         const PsdMat& sigma, const FourierConfig& cfg = {}) {
  spec.validate();
  std::vector<double> out(spec.reset_dates.size());
  parallel_for(static_cast<long>(out.size()), [&](long i) {
    out[i] = caplet_price(cur, p, sigma, spec.reset_dates[i], spec.pay_dates[i], spec.strike_rate, spec.notional, cfg);
  });
  return out;
}

inline double cap_price(const CapSpec& spec, const CurrencySpec& cur, const WishartParams& p, const PsdMat& sigma,
                        const FourierConfig& cfg = {}) {
  double total = 0.0;
  for (double c : caplet_prices(spec, cur, p, sigma, cfg)) total += c;
  return total;
}

}  // namespace wishfx
