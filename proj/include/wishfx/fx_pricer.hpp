#pragma once

// European FX options on S^{i,j} under Q^i.

#include <cmath>
#include <vector>

#include "wishfx/black.hpp"
#include "wishfx/fourier.hpp"
#include "wishfx/transform.hpp"

namespace wishfx {

struct FourierConfig {
  double alpha = 1.5;
  int n_points = 4096;
  double lambda_max = 200.0;
  double abs_tol = 1e-8;

  void validate() const {
    if (!(alpha > 0.0)) throw DomainError("FourierConfig: alpha must be positive");
    if (n_points < 4 || (n_points & (n_points - 1)) != 0)
      throw DomainError("FourierConfig: n_points must be a power of two");
    if (!(lambda_max > 0.0)) throw DomainError("FourierConfig: lambda_max must be positive");
    if (!(abs_tol > 0.0)) throw DomainError("FourierConfig: abs_tol must be positive");
  }
};

/// Discounted log-FX transform at fixed (pair, params, tau, state) as a callable.
inline MgfFn fx_mgf_fn(const FxPairSpec& pair, const WishartParams& p, double tau, const PsdMat& sigma,
                       const TransformOptions& opt = {}) {
  const double x = std::log(pair.spot);
  return [pair, p, tau, sigma, opt, x](cplx w) { return fx_mgf(pair, p, w, tau, x, sigma, opt); };
}

struct ForwardInfo {
  double forward;  // E^{Q^T}[S(T)] = S P^j / P^i
  double df;       // P^i(0, T)
};

inline ForwardInfo fx_forward(const FxPairSpec& pair, const WishartParams& p, double tau, const PsdMat& sigma) {
  const double x = std::log(pair.spot);
  const double g0 = fx_mgf(pair, p, 0.0, tau, x, sigma).real();
  const double g1 = fx_mgf(pair, p, 1.0, tau, x, sigma).real();
  return {g1 / g0, g0};
}

inline double price_call_fourier(const FxPairSpec& pair, const WishartParams& p, double strike, double tau,
                                 const FourierConfig& cfg, const PsdMat& sigma) {
  cfg.validate();
  if (!(strike > 0.0) || !(tau > 0.0)) throw DomainError("price_call_fourier: strike and tau must be positive");
  const FourierSlice slice(fx_mgf_fn(pair, p, tau, sigma), cfg.alpha, {std::log(strike)}, cfg.abs_tol);
  return finalize_price(slice.value(std::log(strike)), "price_call_fourier");
}

inline double price_call_fourier(const FxPairSpec& pair, const WishartParams& p, double strike, double tau,
                                 const FourierConfig& cfg = {}) {
  return price_call_fourier(pair, p, strike, tau, cfg, p.sigma0());
}

/// Calls on a log-strike grid centred at the forward (FFT path).
inline std::vector<StrikePrice> price_grid_fft(const FxPairSpec& pair, const WishartParams& p, double tau,
                                               const FourierConfig& cfg = {}) {
  cfg.validate();
  if (!(tau > 0.0)) throw DomainError("price_grid_fft: tau must be positive");
  const ForwardInfo f = fx_forward(pair, p, tau, p.sigma0());
  auto grid = fft_calls(fx_mgf_fn(pair, p, tau, p.sigma0()), cfg.alpha, cfg.n_points, cfg.lambda_max,
                        std::log(f.forward));
  for (auto& sp : grid) sp.price = std::max(sp.price, 0.0);
  return grid;
}

/// C - P = S P^j(0,T) - K P^i(0,T); both bonds from their own measures.
inline double put_from_parity(double call, const FxPairSpec& pair, const WishartParams& p, double strike, double tau) {
  const double pi = std::exp(zcb_transform(pair.dom, p, tau).exponent(p.sigma0().matrix())).real();
  const double pj = std::exp(zcb_transform(pair.for_, p, tau).exponent(p.sigma0().matrix())).real();
  return finalize_price(call - pair.spot * pj + strike * pi, "put_from_parity");
}

/// Plain PRDC coupon paid at tau: accrual * N * c_for / S(0) * (S(tau) - K)^+
/// with K = S(0) c_dom / c_for.
inline double prdc_coupon_price(const FxPairSpec& pair, const WishartParams& p, double tau, double notional,
                                double c_dom, double c_for, double accrual, const FourierConfig& cfg = {}) {
  if (!(c_for > 0.0)) throw DomainError("prdc_coupon_price: foreign coupon must be positive");
  if (c_dom < 0.0) throw DomainError("prdc_coupon_price: domestic coupon must be non-negative");
  const double scale = accrual * notional * c_for / pair.spot;
  const double strike = pair.spot * c_dom / c_for;
  if (strike == 0.0) {
    const ForwardInfo f = fx_forward(pair, p, tau, p.sigma0());
    return scale * f.df * f.forward;
  }
  return scale * price_call_fourier(pair, p, strike, tau, cfg);
}

}  // namespace wishfx
