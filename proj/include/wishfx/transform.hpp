#pragma once

// Affine transforms of the Wishart hybrid model.
//
// Every transform here has the form exp(a(tau) + Tr[b(tau) S]) where b solves
// a matrix Riccati equation
//   b' = b K11 - K22 b - b K12 b + K21,          K12 = -2 Q'Q,
//   a' = rate + beta Tr[Q'Q b].
// Writing b = F^{-1} G turns it into the linear system
//   d/dtau [G F] = [G F] K,   K = [[K11, K12], [K21, K22]],
// solved by one block exponential per step. a follows from log det F.

#include <cmath>
#include <string>

#include "wishfx/matrix_core.hpp"
#include "wishfx/model.hpp"

namespace wishfx {

struct RiccatiBlocks {
  CMat k11, k12, k21, k22;
  cplx rate{0.0, 0.0};  // constant term of a'
  double beta = 0.0;
  RMat qtq;             // Q'Q; K12 must equal -2 Q'Q

  int dim() const { return static_cast<int>(k11.rows()); }

  CBlock generator() const {
    const int d = dim();
    CBlock k(2 * d, 2 * d);
    k.topLeftCorner(d, d) = k11;
    k.topRightCorner(d, d) = k12;
    k.bottomLeftCorner(d, d) = k21;
    k.bottomRightCorner(d, d) = k22;
    return k;
  }
};

struct SolverDiagnostics {
  int steps_used = 0;
  double cond_B22 = 1.0;      // worst 1-norm condition number of the per-step denominators
  bool ill_conditioned = false;
  bool norm_jump = false;     // |b| grew more than 10x over one step
};

struct AffineSolution {
  cplx a{0.0, 0.0};
  CMat b;
  double tau = 0.0;
  SolverDiagnostics diagnostics;

  cplx exponent(const RMat& sigma) const { return a + trace_prod(b, sigma.cast<cplx>()); }
};

struct TransformOptions {
  int n_steps = 64;          // initial subdivision of [0, tau]
  int max_steps = 1 << 14;   // refinement cap
  bool use_rk4 = false;      // integrate the Riccati ODE directly instead
  int rk4_steps = 2000;
};

namespace detail {

inline bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

template <typename Mat>
double norm1(const Mat& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

// One pass over `n` equal steps with matrices of type Mat (fixed-size for
// small d). Returns false if a step needs refinement.
template <typename Mat>
bool propagate_impl(const RiccatiBlocks& blk, const CMat& b0, double tau, int n, AffineSolution& out) {
  const int d = blk.dim();
  const double h = tau / n;
  const CBlock e = expm((h * blk.generator()).eval());
  const Mat e11 = e.topLeftCorner(d, d), e12 = e.topRightCorner(d, d);
  const Mat e21 = e.bottomLeftCorner(d, d), e22 = e.bottomRightCorner(d, d);

  LogDetAccumulator logdet;
  Mat b = b0;
  double prev_norm = b.norm();
  SolverDiagnostics diag;
  for (int k = 0; k < n; ++k) {
    const Mat denom = b * e12 + e22;  // F(t_k)^{-1} F(t_{k+1})
    const cplx det = denom.determinant();
    if (!finite(det) || det == cplx{0.0, 0.0})
      throw ExplosionError("affine transform: Riccati denominator is singular", (k + 1) * h);
    const Mat inv = denom.inverse();
    const double cond = norm1(denom) * norm1(inv);
    if (!std::isfinite(cond) || cond > 1e15)
      throw ExplosionError("affine transform: Riccati denominator is singular", (k + 1) * h);
    if (!logdet.admissible(det)) return false;
    logdet.add(det);
    b = inv * (b * e11 + e21);
    if (!b.allFinite()) throw ExplosionError("affine transform: non-finite solution", (k + 1) * h);

    diag.cond_B22 = std::max(diag.cond_B22, cond);
    const double nb = b.norm();
    if (prev_norm > 1e-12 && nb > 10.0 * prev_norm) diag.norm_jump = true;
    prev_norm = nb;
  }
  diag.steps_used = n;
  diag.ill_conditioned = diag.cond_B22 > 1e12;
  out.diagnostics = diag;
  out.b = 0.5 * (b + b.transpose());
  out.a = blk.rate * tau - 0.5 * blk.beta * (logdet.value() - tau * blk.k22.trace());
  return true;
}

inline bool propagate(const RiccatiBlocks& blk, const CMat& b0, double tau, int n, AffineSolution& out) {
  switch (blk.dim()) {
    case 1: return propagate_impl<Eigen::Matrix<cplx, 1, 1>>(blk, b0, tau, n, out);
    case 2: return propagate_impl<Eigen::Matrix<cplx, 2, 2>>(blk, b0, tau, n, out);
    case 3: return propagate_impl<Eigen::Matrix<cplx, 3, 3>>(blk, b0, tau, n, out);
    case 4: return propagate_impl<Eigen::Matrix<cplx, 4, 4>>(blk, b0, tau, n, out);
    default: return propagate_impl<CMat>(blk, b0, tau, n, out);
  }
}

}  // namespace detail

/// Classical RK4 on the Riccati ODE and the a-equation. Independent of the
/// block-exponential path; used as the oracle for every closed form.
inline AffineSolution riccati_rk4(const RiccatiBlocks& blk, const CMat& b0, double tau, int n_steps) {
  if (n_steps < 1) throw DomainError("riccati_rk4: n_steps must be >= 1");
  if (tau < 0.0) throw DomainError("riccati_rk4: tau must be >= 0");
  const CMat omega = (blk.beta * blk.qtq).cast<cplx>();
  auto rhs_b = [&](const CMat& b) -> CMat { return b * blk.k11 - blk.k22 * b - b * blk.k12 * b + blk.k21; };
  auto rhs_a = [&](const CMat& b) -> cplx { return blk.rate + trace_prod(omega, b); };

  AffineSolution out;
  out.tau = tau;
  CMat b = b0;
  cplx a{0.0, 0.0};
  const double h = tau / n_steps;
  for (int k = 0; k < n_steps && tau > 0.0; ++k) {
    const CMat k1 = rhs_b(b);
    const CMat b2 = b + 0.5 * h * k1;
    const CMat k2 = rhs_b(b2);
    const CMat b3 = b + 0.5 * h * k2;
    const CMat k3 = rhs_b(b3);
    const CMat b4 = b + h * k3;
    const CMat k4 = rhs_b(b4);
    a += h / 6.0 * (rhs_a(b) + 2.0 * rhs_a(b2) + 2.0 * rhs_a(b3) + rhs_a(b4));
    b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!b.allFinite()) throw ExplosionError("riccati_rk4: overflow", k * h);
  }
  out.a = a;
  out.b = b;
  out.diagnostics.steps_used = n_steps;
  return out;
}

/// Solves the Riccati system with terminal condition b(0) = b0 through the
/// linearized block exponential; a uses the branch-continuous log det F.
inline AffineSolution solve_affine(const RiccatiBlocks& blk, const CMat& b0, double tau,
                                   const TransformOptions& opt = {}) {
  if (tau < 0.0) throw DomainError("affine transform: tau must be >= 0");
  if (tau == 0.0) {
    AffineSolution out;
    out.b = b0;
    return out;
  }
  if (opt.use_rk4) return riccati_rk4(blk, b0, tau, opt.rk4_steps);

  AffineSolution out;
  out.tau = tau;
  for (int n = std::max(1, opt.n_steps); n <= opt.max_steps; n *= 2)
    if (detail::propagate(blk, b0, tau, n, out)) return out;
  throw ExplosionError("affine transform: step refinement cap exceeded", tau);
}

// ---------------------------------------------------------------------------
// Model-specific generators

/// Log-FX transform of S^{i,j} under Q^i at frequency omega.
inline RiccatiBlocks fx_blocks(const FxPairSpec& pair, const WishartParams& p, cplx omega) {
  require_dim(p, pair.dom);
  require_dim(p, pair.for_);
  const RMat m = to_measure(p, pair.dom).M_eff();
  const CMat diff = to_complex(pair.diff());
  const CMat qtr = to_complex(p.Q().transpose() * p.R());
  const cplx gamma = 0.5 * (omega * omega - omega);

  RiccatiBlocks blk;
  blk.qtq = p.QtQ();
  blk.beta = p.beta();
  blk.k11 = to_complex(m) + omega * qtr * diff;
  blk.k12 = -2.0 * to_complex(blk.qtq);
  blk.k21 = gamma * diff * diff + (omega - 1.0) * to_complex(pair.dom.H.matrix()) -
            omega * to_complex(pair.for_.H.matrix());
  blk.k22 = -(to_complex(m).transpose() + omega * diff * qtr.transpose());
  blk.rate = omega * (pair.dom.h - pair.for_.h) - pair.dom.h;
  return blk;
}

/// Discounting of currency `cur` under its own measure Q^cur.
inline RiccatiBlocks zcb_blocks(const CurrencySpec& cur, const WishartParams& p) {
  require_dim(p, cur);
  const RMat m = to_measure(p, cur).M_eff();
  RiccatiBlocks blk;
  blk.qtq = p.QtQ();
  blk.beta = p.beta();
  blk.k11 = to_complex(m);
  blk.k12 = -2.0 * to_complex(blk.qtq);
  blk.k21 = -to_complex(cur.H.matrix());
  blk.k22 = -to_complex(m).transpose();
  blk.rate = -cur.h;
  return blk;
}

inline CMat zero_cmat(int d) { return CMat::Zero(d, d); }

/// (a, b) of the discounted log-FX moment generating function.
inline AffineSolution fx_transform(const FxPairSpec& pair, const WishartParams& p, cplx omega, double tau,
                                   const TransformOptions& opt = {}) {
  return solve_affine(fx_blocks(pair, p, omega), zero_cmat(p.dim()), tau, opt);
}

/// E^{Q^i}[exp(-int r^i) exp(omega log S^{i,j}(T))] given log S = x and state sigma.
inline cplx fx_mgf(const FxPairSpec& pair, const WishartParams& p, cplx omega, double tau, double x,
                   const PsdMat& sigma, const TransformOptions& opt = {}) {
  if (!detail::finite(omega)) throw DomainError("fx_mgf: omega must be finite");
  const AffineSolution s = fx_transform(pair, p, omega, tau, opt);
  return std::exp(omega * x + s.exponent(sigma.matrix()));
}

/// (a, b) of the zero-coupon bond in currency `cur`.
inline AffineSolution zcb_transform(const CurrencySpec& cur, const WishartParams& p, double tau,
                                    const TransformOptions& opt = {}) {
  return solve_affine(zcb_blocks(cur, p), zero_cmat(p.dim()), tau, opt);
}

/// E^{Q^d}[exp(-int_t^{T_reset} r) P(T_reset, T_pay)^omega], evaluated at t = 0
/// with state `sigma`: inner bond transform over the accrual period, then the
/// same generator over [0, T_reset] started from omega * b_ZC.
inline cplx logbond_mgf(const CurrencySpec& cur, const WishartParams& p, cplx omega, double t_reset,
                        double t_pay, const PsdMat& sigma, const TransformOptions& opt = {}) {
  if (!(t_reset >= 0.0 && t_pay >= t_reset)) throw DomainError("logbond_mgf: need 0 <= t_reset <= t_pay");
  const AffineSolution inner = zcb_transform(cur, p, t_pay - t_reset, opt);
  const AffineSolution outer = solve_affine(zcb_blocks(cur, p), omega * inner.b, t_reset, opt);
  return std::exp(omega * inner.a + outer.exponent(sigma.matrix()));
}

}  // namespace wishfx
