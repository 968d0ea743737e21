#pragma once

// Vol-of-vol expansion. The family of models indexed by alpha replaces
//   Q -> alpha Q,  beta -> beta / alpha^2,  M -> Mt + alpha Q'R A_i,
// which keeps the drift Mt = M - Q'R A_i under the domestic measure and the
// constant term Omega Omega' = beta Q'Q fixed while scaling the diffusion of S.
// Expanding the Riccati solution in alpha gives, with D = A_i - A_j and
// gamma = (w^2 - w)/2,
//   B = gamma Bt0 + alpha gamma w Bt1 + alpha^2 (gamma^2 Bt20 + gamma w^2 Bt21) + O(alpha^3)
// where each Bt solves Bt' = Bt Mt + Mt' Bt + F with
//   F0 = D^2, F1 = Bt0 Q'R D + D R'Q Bt0, F20 = 2 Bt0 Q'Q Bt0, F21 = Bt1 Q'R D + D R'Q Bt1
// and At = int_0^tau Tr[Omega Omega' Bt(u)] du.

#include <cmath>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "wishfx/black.hpp"
#include "wishfx/model.hpp"
#include "wishfx/quadrature.hpp"

namespace wishfx {

struct ExpansionCoeffs {
  SymMat b0, b1, b20, b21;
  double a0 = 0.0, a1 = 0.0, a20 = 0.0, a21 = 0.0;
  double tau = 0.0;

  // At + Tr[Bt S] for each order.
  double c0(const PsdMat& s) const { return a0 + trace_prod(b0.matrix(), s.matrix()); }
  double c1(const PsdMat& s) const { return a1 + trace_prod(b1.matrix(), s.matrix()); }
  double c20(const PsdMat& s) const { return a20 + trace_prod(b20.matrix(), s.matrix()); }
  double c21(const PsdMat& s) const { return a21 + trace_prod(b21.matrix(), s.matrix()); }
};

namespace detail {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline VecX vec(const RMat& m) { return Eigen::Map<const VecX>(m.data(), m.size()); }

inline RMat unvec(const VecX& v, int d) {
  RMat m = Eigen::Map<const MatX>(v.data(), d, d);
  return 0.5 * (m + m.transpose());
}

// Matrix of X -> X G + G' X on column-major vec.
inline MatX lyapunov_operator(const RMat& g) {
  const int d = static_cast<int>(g.rows());
  const MatX id = MatX::Identity(d, d);
  return Eigen::kroneckerProduct(g.transpose(), id).eval() + Eigen::kroneckerProduct(id, g.transpose()).eval();
}

struct ExpansionSetup {
  int d = 0;
  RMat mt, d2, qtq, qtrd, omega;
  MatX k, t;  // Lyapunov operator of Mt; source operator of Bt1 / Bt21
  VecX w;     // vec(Omega Omega') so that Tr[Omega Omega' X] = w . vec(X)
};

inline ExpansionSetup expansion_setup(const FxPairSpec& pair, const WishartParams& p) {
  require_dim(p, pair.dom);
  require_dim(p, pair.for_);
  ExpansionSetup s;
  s.d = p.dim();
  s.mt = p.M() - p.Q().transpose() * p.R() * pair.dom.A.matrix();
  const RMat dd = pair.diff();
  s.d2 = dd * dd;
  s.qtq = p.QtQ();
  s.qtrd = p.Q().transpose() * p.R() * dd;
  s.omega = p.beta() * s.qtq;
  s.k = lyapunov_operator(s.mt);
  s.t = lyapunov_operator(s.qtrd);
  s.w = vec(s.omega);
  return s;
}

// exp([[K, I], [0, 0]] t) = [[e^{tK}, int_0^t e^{sK} ds], [0, I]].
inline std::pair<MatX, MatX> flow_and_integral(const MatX& k, double t) {
  const long n = k.rows();
  MatX blk = MatX::Zero(2 * n, 2 * n);
  blk.topLeftCorner(n, n) = k * t;
  blk.topRightCorner(n, n) = MatX::Identity(n, n) * t;
  const MatX e = expm(blk);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

}  // namespace detail

/// Bt/At coefficients at tau. Bt0, Bt1, Bt21 and their At come from one block
/// exponential of the stacked linear system; Bt20 (quadratic in Bt0) from
/// Gauss-Legendre quadrature, doubled from 64 nodes until it moves by < 1e-10.
inline ExpansionCoeffs expansion_coeffs(const FxPairSpec& pair, const WishartParams& p, double tau) {
  if (!(tau >= 0.0)) throw DomainError("expansion_coeffs: tau must be >= 0");
  const auto s = detail::expansion_setup(pair, p);
  const int d = s.d;
  const long n = static_cast<long>(d) * d;
  ExpansionCoeffs c;
  c.tau = tau;
  c.b0 = c.b1 = c.b20 = c.b21 = SymMat(d);
  if (tau == 0.0) return c;

  // State [b0, b1, b21, a0, a1, a21, 1].
  const long m = 3 * n + 4;
  detail::MatX big = detail::MatX::Zero(m, m);
  for (int blk = 0; blk < 3; ++blk) {
    big.block(blk * n, blk * n, n, n) = s.k;
    big.block(3 * n + blk, blk * n, 1, n) = s.w.transpose();
  }
  big.block(n, 0, n, n) = s.t;
  big.block(2 * n, n, n, n) = s.t;
  big.block(0, m - 1, n, 1) = detail::vec(s.d2);
  const detail::VecX y = expm((tau * big).eval()).col(m - 1);
  c.b0 = SymMat::from_full(detail::unvec(y.segment(0, n), d));
  c.b1 = SymMat::from_full(detail::unvec(y.segment(n, n), d));
  c.b21 = SymMat::from_full(detail::unvec(y.segment(2 * n, n), d));
  c.a0 = y(3 * n);
  c.a1 = y(3 * n + 1);
  c.a21 = y(3 * n + 2);

  // Bt20(tau) = int_0^tau e^{(tau-u)K} f(u) du, At20 = int_0^tau w' Phi(tau-u) f(u) du,
  // f(u) = vec(2 Bt0(u) Q'Q Bt0(u)), Bt0(u) = Phi(u) vec(D^2).
  const detail::VecX vd2 = detail::vec(s.d2);
  auto integrate = [&](int nodes, detail::VecX& b, double& a) {
    const GaussRule& rule = gauss_legendre(nodes);
    b = detail::VecX::Zero(n);
    a = 0.0;
    for (int q = 0; q < nodes; ++q) {
      const double u = 0.5 * tau * (rule.nodes[q] + 1.0);
      const double wq = 0.5 * tau * rule.weights[q];
      const RMat b0u = detail::unvec(detail::flow_and_integral(s.k, u).second * vd2, d);
      const detail::VecX f = detail::vec(2.0 * b0u * s.qtq * b0u);
      const auto [flow, integral] = detail::flow_and_integral(s.k, tau - u);
      b += wq * flow * f;
      a += wq * s.w.dot(integral * f);
    }
  };
  detail::VecX b20;
  double a20 = 0.0;
  integrate(64, b20, a20);
  for (int nodes = 128; nodes <= 1024; nodes *= 2) {
    detail::VecX nb;
    double na = 0.0;
    integrate(nodes, nb, na);
    const double change = std::max((nb - b20).cwiseAbs().maxCoeff(), std::abs(na - a20));
    b20 = nb;
    a20 = na;
    if (change < 1e-10) break;
  }
  c.b20 = SymMat::from_full(detail::unvec(b20, d));
  c.a20 = a20;
  return c;
}

/// Black call partials in (x = log spot, v = total variance), as ratios to
/// C_v, with m = log(F/K).
struct BlackRatios {
  double xv, vv, xxv, xxvv;
};

inline BlackRatios black_ratios(double m, double v) {
  if (!(v > 0.0)) throw DegenerateError("black_ratios: total variance must be positive");
  const double lm = 0.5 - m / v;                                    // d/dm log C_v
  const double lv = m * m / (2.0 * v * v) - 0.5 / v - 0.125;        // d/dv log C_v
  const double xxv = lm * lm - 1.0 / v;
  const double xxvv = lv * xxv + 1.0 / (v * v) + 2.0 * lm * m / (v * v);
  return {lm, lv, xxv, xxvv};
}

namespace detail {

inline void require_constant_rates(const FxPairSpec& pair, const char* what) {
  if (pair.dom.H.matrix().cwiseAbs().maxCoeff() != 0.0 || pair.for_.H.matrix().cwiseAbs().maxCoeff() != 0.0)
    throw UnsupportedRegimeError(std::string(what) + ": requires constant rates (H = 0 in both currencies)");
}

}  // namespace detail

/// Parameters of the alpha-member of the expansion family (see top of file).
inline WishartParams scaled_params(const WishartParams& p, const CurrencySpec& dom, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("scaled_params: alpha must be positive");
  require_dim(p, dom);
  const RMat mt = p.M() - p.Q().transpose() * p.R() * dom.A.matrix();
  return WishartParams(p.beta() / (alpha * alpha), mt + alpha * p.Q().transpose() * p.R() * dom.A.matrix(),
                       alpha * p.Q(), p.R(), p.sigma0());
}

/// Second-order vol-of-vol expansion of the call price through Black partials
/// at the integrated variance v = At0 + Tr[Bt0 S].
inline double price_expansion(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma, double spot,
                              double strike, double tau, double alpha) {
  detail::require_constant_rates(pair, "price_expansion");
  if (!(spot > 0.0) || !(strike > 0.0) || !(tau > 0.0)) throw DomainError("price_expansion: invalid inputs");
  if (!(alpha >= 0.0)) throw DomainError("price_expansion: alpha must be >= 0");
  const auto c = expansion_coeffs(pair, p, tau);
  const double df = std::exp(-pair.dom.h * tau);
  const double fwd = spot * std::exp((pair.dom.h - pair.for_.h) * tau);
  const double v = c.c0(sigma);
  const double base = black_price_var(fwd, strike, v, df);
  if (alpha == 0.0) return base;
  const double cv = black_dv(fwd, strike, v, df);
  const auto r = black_ratios(std::log(fwd / strike), v);
  const double c1 = c.c1(sigma);
  return base + alpha * c1 * r.xv * cv +
         alpha * alpha * (c.c20(sigma) * r.vv + c.c21(sigma) * r.xxv + 0.5 * c1 * c1 * r.xxvv) * cv;
}

/// Implied total variance to second order in alpha at any maturity:
/// v0 + alpha z1 + alpha^2 z2 with z1 = c1 C_xv/C_v and
/// z2 = (c20 C_vv + c21 C_xxv + c1^2 C_xxvv / 2 - z1^2 C_vv / 2) / C_v.
inline double impvar_expansion(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma, double mf,
                               double tau, double alpha) {
  detail::require_constant_rates(pair, "impvar_expansion");
  if (!(tau > 0.0)) throw DomainError("impvar_expansion: tau must be positive");
  const auto c = expansion_coeffs(pair, p, tau);
  const double v = c.c0(sigma);
  const auto r = black_ratios(mf, v);
  const double c1 = c.c1(sigma);
  const double z1 = c1 * r.xv;
  const double z2 = c.c20(sigma) * r.vv + c.c21(sigma) * r.xxv + 0.5 * c1 * c1 * r.xxvv - 0.5 * z1 * z1 * r.vv;
  return (v + alpha * z1 + alpha * alpha * z2) / tau;
}

/// Leading short-maturity implied variance as a function of log-moneyness
/// mf = log(F/K):
///   V0 - alpha k1 mf / V0 + alpha^2 mf^2 / V0^2 (k20/3 + k21/3 - 5 k1^2 / (4 V0))
/// with V0 = Tr[D S D], k1 = Tr[D^2 Q'R D S], k20 = Tr[D^2 Q'Q D^2 S],
/// k21 = Tr[(D^2 Q'R D + D R'Q D^2) Q'R D S].
inline double shortmat_impvar(const FxPairSpec& pair, const WishartParams& p, const PsdMat& sigma, double mf,
                              double tau, double alpha) {
  detail::require_constant_rates(pair, "shortmat_impvar");
  require_dim(p, pair.dom);
  if (!(tau > 0.0)) throw DomainError("shortmat_impvar: tau must be positive");
  const RMat d = pair.diff(), d2 = d * d, s = sigma.matrix();
  const RMat qtr = p.Q().transpose() * p.R();
  const double v0 = trace_prod((d * s).eval(), d);
  if (!(v0 > 0.0)) throw DegenerateError("shortmat_impvar: zero instantaneous variance");
  const double k1 = trace_prod((d2 * qtr * d).eval(), s);
  const double k20 = trace_prod((d2 * p.QtQ() * d2).eval(), s);
  const RMat x = d2 * qtr * d + d * qtr.transpose() * d2;
  const double k21 = trace_prod((x * qtr * d).eval(), s);
  return v0 - alpha * k1 * mf / v0 +
         alpha * alpha * mf * mf / (v0 * v0) * (k20 / 3.0 + k21 / 3.0 - 1.25 * k1 * k1 / v0);
}

}  // namespace wishfx
