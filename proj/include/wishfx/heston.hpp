#pragma once

// Diagonal specialisation: with M, Q, R, S(0), A_i, A_j, H^i, H^j diagonal the
// factors S_pp are independent CIR processes and log S^{i,j} is a
// multi-factor Heston model. The closed forms here do not use the matrix
// Riccati machinery and serve as an independent oracle for it.

#include <cmath>
#include <complex>
#include <vector>

#include "wishfx/model.hpp"

namespace wishfx {

struct HestonFactor {
  double v0;      // S_pp(0)
  double m;       // M_pp (drift of S_pp is beta Q_pp^2 + 2 M_pp S_pp)
  double q;       // Q_pp (vol of vol of S_pp is 2 Q_pp)
  double rho;     // R_pp
  double a_dom;   // (A_i)_pp
  double a_for;   // (A_j)_pp
  double h_dom;   // (H^i)_pp
  double h_for;   // (H^j)_pp

  // Parameters of the factor under the domestic measure Q^i.
  double kappa() const { return -2.0 * (m - q * rho * a_dom); }
  double sigma_v() const { return 2.0 * q; }
};

struct DiagonalNest {
  double beta = 0.0;
  double h_dom = 0.0, h_for = 0.0;
  std::vector<HestonFactor> factors;

  double kappa_theta(const HestonFactor& f) const { return beta * f.q * f.q; }
};

namespace detail {

template <typename Derived>
bool is_diagonal(const Eigen::MatrixBase<Derived>& m, double tol = 1e-14) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && std::abs(m(i, j)) > tol) return false;
  return true;
}

}  // namespace detail

inline DiagonalNest nest_from_diagonal(const WishartParams& p, const FxPairSpec& pair) {
  require_dim(p, pair.dom);
  require_dim(p, pair.for_);
  using detail::is_diagonal;
  if (!is_diagonal(p.M()) || !is_diagonal(p.Q()) || !is_diagonal(p.R()) || !is_diagonal(p.sigma0().matrix()) ||
      !is_diagonal(pair.dom.A.matrix()) || !is_diagonal(pair.for_.A.matrix()) || !is_diagonal(pair.dom.H.matrix()) ||
      !is_diagonal(pair.for_.H.matrix()))
    throw DomainError("nest_from_diagonal: all model matrices must be diagonal");
  DiagonalNest n;
  n.beta = p.beta();
  n.h_dom = pair.dom.h;
  n.h_for = pair.for_.h;
  for (int k = 0; k < p.dim(); ++k)
    n.factors.push_back({p.sigma0()(k, k), p.M()(k, k), p.Q()(k, k), p.R()(k, k), pair.dom.A(k, k),
                         pair.for_.A(k, k), pair.dom.H(k, k), pair.for_.H(k, k)});
  return n;
}

struct ScalarAffine {
  cplx a;  // integral of kappa*theta*b
  cplx b;
};

namespace detail {

// Scalar Riccati b' = c - p b + (sigma^2/2) b^2, b(0) = 0, with
// a' = kt * b. "Little trap" form: only exp(-d tau) appears.
inline ScalarAffine heston_little_trap(cplx p, cplx c, double sigma, double kt, double tau) {
  const double s2 = sigma * sigma;
  const cplx d = std::sqrt(p * p - 2.0 * s2 * c);
  const cplx g = (p - d) / (p + d);
  const cplx e = std::exp(-d * tau);
  const cplx b = (p - d) / s2 * (1.0 - e) / (1.0 - g * e);
  const cplx a = kt / s2 * ((p - d) * tau - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
  return {a, b};
}

// Original formulation with g' = 1/g and exp(+d tau).
inline ScalarAffine heston_original(cplx p, cplx c, double sigma, double kt, double tau) {
  const double s2 = sigma * sigma;
  const cplx d = std::sqrt(p * p - 2.0 * s2 * c);
  const cplx g = (p + d) / (p - d);
  const cplx e = std::exp(d * tau);
  const cplx b = (p + d) / s2 * (1.0 - e) / (1.0 - g * e);
  const cplx a = kt / s2 * ((p + d) * tau - 2.0 * std::log((1.0 - g * e) / (1.0 - g)));
  return {a, b};
}

// p and c of factor f at frequency omega.
inline std::pair<cplx, cplx> factor_coeffs(const HestonFactor& f, cplx omega) {
  const double dd = f.a_dom - f.a_for;
  const cplx gamma = 0.5 * (omega * omega - omega);
  const cplx p = f.kappa() - f.rho * f.sigma_v() * dd * omega;
  const cplx c = gamma * dd * dd + (omega - 1.0) * f.h_dom - omega * f.h_for;
  return {p, c};
}

template <typename Scalar>
cplx heston_mgf_impl(const DiagonalNest& n, cplx omega, double tau, double x, Scalar&& scalar) {
  cplx expo = omega * x + (omega * (n.h_dom - n.h_for) - n.h_dom) * tau;
  for (const auto& f : n.factors) {
    const auto [p, c] = factor_coeffs(f, omega);
    const ScalarAffine s = scalar(p, c, f.sigma_v(), n.kappa_theta(f), tau);
    expo += s.a + s.b * f.v0;
  }
  return std::exp(expo);
}

}  // namespace detail

/// Discounted log-FX transform of the nested multi-Heston model.
inline cplx heston_mgf_oracle(const DiagonalNest& n, cplx omega, double tau, double x) {
  if (!(tau >= 0.0)) throw DomainError("heston_mgf_oracle: tau must be >= 0");
  const cplx out = detail::heston_mgf_impl(n, omega, tau, x, detail::heston_little_trap);
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
    throw ExplosionError("heston_mgf_oracle: scalar transform explodes", tau);
  return out;
}

/// Same transform in the original (branch-unsafe for long maturities) form.
inline cplx heston_mgf_original(const DiagonalNest& n, cplx omega, double tau, double x) {
  return detail::heston_mgf_impl(n, omega, tau, x, detail::heston_original);
}

}  // namespace wishfx
