#pragma once

// Instantaneous second moments of log-FX rates, their variance and the short
// rates. All covariations follow from
//   d<Tr[U sqrt(S) dZ], Tr[V sqrt(S) dZ]> = Tr[U S V'] dt
// (same for dW), with W = Z R' + B sqrt(I - R R') so that
//   Tr[U sqrt(S) dW Q] contributes Tr[R'Q U sqrt(S) dZ] to the dZ leg.

#include <cmath>

#include "wishfx/model.hpp"

namespace wishfx {

struct InstantCorrReport {
  double var_fx = 0.0;    // variance rate of the first leg (log S, or its variance process)
  double var_rate = 0.0;  // variance rate of the short rate
  double covar = 0.0;
  double corr = 0.0;
};

namespace detail {

inline void require_same_dim(const FxPairSpec& pair, const PsdMat& sigma) {
  if (pair.dom.dim() != sigma.dim()) throw ShapeError("analytics: dimension mismatch");
}

inline double checked_corr(double cov, double v1, double v2, const char* what) {
  const double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
  if (v1 <= 1e-14 * scale || v2 <= 1e-14 * scale || v1 <= 0.0 || v2 <= 0.0)
    throw DegenerateError(std::string(what) + ": zero instantaneous variance");
  return cov / std::sqrt(v1 * v2);
}

}  // namespace detail

/// Tr[(A_i - A_j) S (A_i - A_j)].
inline double fx_instant_var(const FxPairSpec& pair, const PsdMat& sigma) {
  detail::require_same_dim(pair, sigma);
  const RMat d = pair.diff();
  return trace_prod((d * sigma.matrix()).eval(), d);
}

/// Tr[(A_i - A_j) S (A_i - A_l)] for two pairs sharing the domestic currency.
inline double fx_instant_cov(const FxPairSpec& ij, const FxPairSpec& il, const PsdMat& sigma) {
  detail::require_same_dim(ij, sigma);
  detail::require_same_dim(il, sigma);
  if (ij.dom.label != il.dom.label) throw DomainError("fx_instant_cov: pairs must share the domestic currency");
  return trace_prod((ij.diff() * sigma.matrix()).eval(), il.diff());
}

/// Correlation between log S^{i,j} and its instantaneous variance
///   Tr[D S D^2 Q'R] / (sqrt(Tr[D S D]) sqrt(Tr[Q D^2 S D^2 Q'])).
inline double skew_corr(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma) {
  detail::require_same_dim(pair, sigma);
  const RMat d = pair.diff(), d2 = d * d, s = sigma.matrix();
  const double cov = 2.0 * trace_prod((d * s * d2).eval(), (p.Q().transpose() * p.R()).eval());
  const double var_v = 4.0 * trace_prod((p.Q() * d2 * s).eval(), (d2 * p.Q().transpose()).eval());
  return detail::checked_corr(cov, fx_instant_var(pair, sigma), var_v, "skew_corr");
}

/// Correlation between the domestic short rate and log S^{i,j}.
inline InstantCorrReport rate_fx_corr(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma) {
  detail::require_same_dim(pair, sigma);
  const RMat d = pair.diff(), h = pair.dom.H.matrix(), s = sigma.matrix();
  InstantCorrReport r;
  r.var_fx = fx_instant_var(pair, sigma);
  r.var_rate = 4.0 * trace_prod((p.Q() * h * s).eval(), (h * p.Q().transpose()).eval());
  r.covar = 2.0 * trace_prod((d * s * h).eval(), (p.Q().transpose() * p.R()).eval());
  r.corr = detail::checked_corr(r.covar, r.var_fx, r.var_rate, "rate_fx_corr");
  return r;
}

/// Correlation between the domestic short rate and the instantaneous
/// variance Tr[D S D] of log S^{i,j}.
inline InstantCorrReport rate_var_corr(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma) {
  detail::require_same_dim(pair, sigma);
  const RMat d = pair.diff(), d2 = d * d, h = pair.dom.H.matrix(), s = sigma.matrix();
  const RMat qt = p.Q().transpose();
  InstantCorrReport r;
  r.var_fx = 4.0 * trace_prod((p.Q() * d2 * s).eval(), (d2 * qt).eval());
  r.var_rate = 4.0 * trace_prod((p.Q() * h * s).eval(), (h * qt).eval());
  r.covar = 4.0 * trace_prod((p.Q() * h * s).eval(), (d2 * qt).eval());
  r.corr = detail::checked_corr(r.covar, r.var_fx, r.var_rate, "rate_var_corr");
  return r;
}

}  // namespace wishfx
