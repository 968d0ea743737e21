#pragma once

// Parameter space of the Wishart FX/short-rate model and the transport of
// the drift matrix between currency risk-neutral measures.

#include <string>
#include <utility>
#include <vector>

#include "wishfx/matrix_core.hpp"

namespace wishfx {

enum class Validation { checked, unchecked };

/// State-space parameters of the common Wishart factor
///   dS = (beta Q'Q + M S + S M') dt + sqrt(S) dW Q + Q' dW' sqrt(S).
/// Omega is never stored; only beta Q'Q enters any formula.
class WishartParams {
 public:
  WishartParams() = default;

  WishartParams(double beta, RMat m, RMat q, RMat r, PsdMat sigma0,
                Validation v = Validation::checked)
      : beta_(beta), m_(std::move(m)), q_(std::move(q)), r_(std::move(r)), sigma0_(std::move(sigma0)) {
    const int d = sigma0_.dim();
    for (const RMat* x : {&m_, &q_, &r_})
      if (x->rows() != d || x->cols() != d) throw ShapeError("WishartParams: M, Q, R must be d x d");
    if (!m_.allFinite() || !q_.allFinite() || !r_.allFinite() || !std::isfinite(beta_))
      throw DomainError("WishartParams: non-finite parameter");
    if (v == Validation::checked) validate_hard();
    collect_warnings();
  }

  int dim() const noexcept { return sigma0_.dim(); }
  double beta() const noexcept { return beta_; }
  const RMat& M() const noexcept { return m_; }
  const RMat& Q() const noexcept { return q_; }
  const RMat& R() const noexcept { return r_; }
  const PsdMat& sigma0() const noexcept { return sigma0_; }
  RMat QtQ() const { return q_.transpose() * q_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  // Same parameters with a different initial state.
  WishartParams with_sigma0(PsdMat s) const {
    WishartParams p = *this;
    p.sigma0_ = std::move(s);
    return p;
  }

 private:
  void validate_hard() const {
    const int d = dim();
    if (beta_ < d + 1)
      throw DomainError("WishartParams: beta = " + std::to_string(beta_) + " violates beta >= d+1 = " +
                        std::to_string(d + 1));
    const RMat gap = RMat::Identity(d, d) - r_ * r_.transpose();
    Eigen::SelfAdjointEigenSolver<RMat> es(gap, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdRelTol * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
      throw DomainError("WishartParams: I - R R' is not positive semidefinite");
  }

  void collect_warnings() {
    Eigen::EigenSolver<RMat> es(m_, false);
    if (es.eigenvalues().real().maxCoeff() > 1e-8)
      warnings_.push_back("M has an eigenvalue with positive real part (no mean reversion)");
  }

  double beta_ = 0.0;
  RMat m_, q_, r_;
  PsdMat sigma0_;
  std::vector<std::string> warnings_;
};

/// One currency: FX volatility projection A and short rate r = h + Tr[H S].
struct CurrencySpec {
  std::string label;
  SymMat A;
  double h = 0.0;
  PsdMat H;

  int dim() const { return A.dim(); }
  // h < 0 is admissible (the calibrated parameter set has negative h).
  std::vector<std::string> warnings() const {
    if (h <= 0.0) return {"currency " + label + ": h <= 0"};
    return {};
  }
};

/// Exchange rate S^{dom,for}: price in `dom` of one unit of `for_`.
struct FxPairSpec {
  CurrencySpec dom;
  CurrencySpec for_;
  double spot = 1.0;

  FxPairSpec() = default;
  FxPairSpec(CurrencySpec d, CurrencySpec f, double s) : dom(std::move(d)), for_(std::move(f)), spot(s) {
    if (!(spot > 0.0)) throw DomainError("FxPairSpec: spot must be positive");
    if (dom.dim() != for_.dim()) throw ShapeError("FxPairSpec: currency dimensions differ");
  }

  RMat diff() const { return dom.A.matrix() - for_.A.matrix(); }
  std::string name() const { return dom.label + "/" + for_.label; }
};

/// Pricing measure Q^i and its drift matrix M^{Q^i}. R and Q do not change
/// under a change of currency measure.
class MeasureContext {
 public:
  const std::string& label() const noexcept { return label_; }
  const RMat& M_eff() const noexcept { return m_eff_; }

 private:
  MeasureContext(std::string label, RMat m) : label_(std::move(label)), m_eff_(std::move(m)) {}
  friend MeasureContext to_measure(const WishartParams&, const CurrencySpec&);
  friend MeasureContext retarget(const MeasureContext&, const CurrencySpec&, const CurrencySpec&,
                                 const WishartParams&);
  friend MeasureContext universal_measure(const WishartParams&);

  std::string label_;
  RMat m_eff_;
};

inline void require_dim(const WishartParams& p, const CurrencySpec& c) {
  if (c.dim() != p.dim() || c.H.dim() != p.dim())
    throw ShapeError("currency " + c.label + " has dimension " + std::to_string(c.dim()) +
                     ", model has " + std::to_string(p.dim()));
}

// Measure of the universal numeraire (currency 0).
inline MeasureContext universal_measure(const WishartParams& p) { return MeasureContext("0", p.M()); }

/// M^{Q^i} = M - Q' R A_i.
inline MeasureContext to_measure(const WishartParams& p, const CurrencySpec& target) {
  require_dim(p, target);
  RMat m = p.M() - p.Q().transpose() * p.R() * target.A.matrix();
  return MeasureContext(target.label, std::move(m));
}

/// M^{Q^j} = M^{Q^i} - Q' R (A_j - A_i).
inline MeasureContext retarget(const MeasureContext& ctx, const CurrencySpec& from, const CurrencySpec& to,
                               const WishartParams& p) {
  if (ctx.label() != from.label)
    throw DomainError("retarget: context is for measure '" + ctx.label() + "', not '" + from.label + "'");
  require_dim(p, from);
  require_dim(p, to);
  if (from.label == to.label) return ctx;
  RMat m = ctx.M_eff() - p.Q().transpose() * p.R() * (to.A.matrix() - from.A.matrix());
  return MeasureContext(to.label, std::move(m));
}

/// Quanto drift Tr[(A_i - A_j) S A_i] of S^{i,j} under the universal measure.
inline double quanto_drift(const FxPairSpec& pair, const PsdMat& sigma) {
  if (sigma.dim() != pair.dom.dim()) throw ShapeError("quanto_drift: dimension mismatch");
  return trace_prod(pair.diff() * sigma.matrix(), pair.dom.A.matrix());
}

inline double short_rate(const CurrencySpec& c, const PsdMat& sigma) {
  return c.h + trace_prod(c.H.matrix(), sigma.matrix());
}

}  // namespace wishfx
