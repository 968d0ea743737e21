#pragma once

// Damped Fourier inversion of European payoffs from a discounted moment
// generating function G(omega) = E[D(T) exp(omega X_T)].
//
// With damping a, the payoff e^{X} - e^{k} gives
//   V(k) = e^{-a k}/pi * int_0^inf Re[e^{-i v k} psi(v)] dv,
//   psi(v) = G(a+1+iv) / ((a+iv)(a+1+iv)).
// a > 0 yields the call, a < -1 the put on the same underlying.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "wishfx/errors.hpp"
#include "wishfx/matrix_core.hpp"
#include "wishfx/parallel.hpp"
#include "wishfx/quadrature.hpp"

namespace wishfx {

using MgfFn = std::function<cplx(cplx)>;

inline constexpr double kNegativePriceTol = 1e-8;

// Clamps tiny negative prices to zero; larger ones signal a broken inversion.
inline double finalize_price(double price, const char* what) {
  if (!std::isfinite(price)) throw NumericError(std::string(what) + ": non-finite price");
  if (price < -kNegativePriceTol) throw NumericError(std::string(what) + ": negative price " + std::to_string(price));
  return std::max(price, 0.0);
}

namespace detail {

inline cplx damped_psi(const MgfFn& g, double a, double v) {
  const cplx iv(0.0, v);
  return g(a + 1.0 + iv) / ((a + iv) * (a + 1.0 + iv));
}

// Checks G at the real damping point; an explosion there means no inversion.
inline double probe_damping(const MgfFn& g, double a) {
  try {
    const cplx z = g(a + 1.0);
    if (!(std::isfinite(z.real()) && z.real() > 0.0))
      throw DampingError("damping a=" + std::to_string(a) + " is outside the strip of regularity");
    return z.real();
  } catch (const ExplosionError&) {
    throw DampingError("transform explodes at damping a=" + std::to_string(a) + "; use a smaller damping");
  }
}

}  // namespace detail

/// Gauss-Legendre panels on [0, v_max] shared by a set of log-strikes.
///
/// Panels are narrow near v = 0 (poles of the damping denominator) and grow
/// geometrically up to the oscillation scale of the strikes. Each refinement
/// splits every panel in two until the prices at the requested strikes move by
/// less than the tolerance. v_max is chosen where the integrand envelope makes
/// the tail negligible, capped at kMaxFrequency (reached only by transforms
/// that do not decay, e.g. deterministic underlyings).
class FourierSlice {
 public:
  static constexpr int kNodesPerPanel = 16;
  static constexpr double kMaxFrequency = 65536.0;
  static constexpr int kMaxRefinements = 10;

  FourierSlice(const MgfFn& g, double damping, const std::vector<double>& log_strikes, double abs_tol)
      : g_(g), a_(damping) {
    if (log_strikes.empty()) throw DomainError("FourierSlice: no strikes");
    if (!(damping > 0.0 || damping < -1.0)) throw DomainError("FourierSlice: damping must be > 0 or < -1");
    const double g_real = detail::probe_damping(g_, a_);

    // Mean of the tilted log-price gives the oscillation centre of psi.
    const double h = 1e-4;
    const double centre = std::arg(g_(cplx(a_ + 1.0, h)) / g_real) / h;
    double spread = 0.0, scale = 0.0;
    for (double k : log_strikes) {
      spread = std::max(spread, std::abs(k - centre));
      scale = std::max(scale, std::exp(-a_ * k) / std::numbers::pi);
    }

    // Tail: assume the envelope decays at least like 1/v^2 beyond v_max.
    v_max_ = 2.0;
    while (v_max_ < kMaxFrequency && scale * std::abs(detail::damped_psi(g_, a_, v_max_)) * v_max_ > 0.1 * abs_tol)
      v_max_ *= 2.0;
    truncated_ = v_max_ >= kMaxFrequency;

    const double w_osc = 8.0 / (0.1 + spread);
    std::vector<double> edges{0.0};
    while (edges.back() < v_max_) {
      const double v = edges.back();
      edges.push_back(std::min(v_max_, v + std::min(w_osc, std::max(1.0, 0.5 * v))));
    }

    build(edges);
    edges_ = edges;
    std::vector<double> prev = values(log_strikes);
    for (int level = 1;; ++level) {
      if (level > kMaxRefinements) throw NumericError("FourierSlice: quadrature did not converge");
      std::vector<double> finer{0.0};
      for (std::size_t i = 1; i < edges.size(); ++i) {
        finer.push_back(0.5 * (edges[i - 1] + edges[i]));
        finer.push_back(edges[i]);
      }
      edges = std::move(finer);
      build(edges);
      edges_ = edges;
      std::vector<double> next = values(log_strikes);
      double diff = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next[i] - prev[i]));
      if (diff < abs_tol) break;
      prev = std::move(next);
    }
  }

  /// Same quadrature nodes as `layout` applied to another transform, with no
  /// refinement. Prices are then smooth in the parameters of g, as needed for
  /// finite-difference derivatives.
  FourierSlice(const MgfFn& g, const FourierSlice& layout)
      : g_(g), a_(layout.a_), v_max_(layout.v_max_), truncated_(layout.truncated_), edges_(layout.edges_) {
    detail::probe_damping(g_, a_);
    build(edges_);
  }

  /// Undamped payoff value at log-strike k (call for a > 0, put for a < -1).
  double value(double k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < v_.size(); ++j) s += w_[j] * (std::exp(cplx(0.0, -v_[j] * k)) * psi_[j]).real();
    return std::exp(-a_ * k) / std::numbers::pi * s;
  }

  int nodes() const { return static_cast<int>(v_.size()); }
  double v_max() const { return v_max_; }
  bool truncated() const { return truncated_; }

 private:
  void build(const std::vector<double>& edges) {
    const GaussRule& r = gauss_legendre(kNodesPerPanel);
    const std::size_t panels = edges.size() - 1;
    const std::size_t n = panels * kNodesPerPanel;
    v_.resize(n);
    w_.resize(n);
    psi_.resize(n);
    for (std::size_t p = 0; p < panels; ++p) {
      const double h = edges[p + 1] - edges[p];
      for (int q = 0; q < kNodesPerPanel; ++q) {
        v_[p * kNodesPerPanel + q] = edges[p] + 0.5 * h * (r.nodes[q] + 1.0);
        w_[p * kNodesPerPanel + q] = 0.5 * h * r.weights[q];
      }
    }
    parallel_for(static_cast<long>(n), [&](long j) { psi_[j] = detail::damped_psi(g_, a_, v_[j]); });
  }

  std::vector<double> values(const std::vector<double>& ks) const {
    std::vector<double> out;
    out.reserve(ks.size());
    for (double k : ks) out.push_back(value(k));
    return out;
  }

  MgfFn g_;
  double a_;
  double v_max_ = 2.0;
  bool truncated_ = false;
  std::vector<double> edges_;
  std::vector<double> v_, w_;
  std::vector<cplx> psi_;
};

struct StrikePrice {
  double strike;
  double price;
};

/// Carr-Madan FFT: N frequencies v_j = j*eta (eta = lambda_max/N) with
/// Simpson weights, log-strikes k_u = centre + (u - N/2) * 2pi/lambda_max.
inline std::vector<StrikePrice> fft_calls(const MgfFn& g, double alpha, int n, double lambda_max, double centre) {
  if (!(alpha > 0.0)) throw DomainError("fft: damping must be positive");
  if (n < 4 || (n & (n - 1)) != 0) throw DomainError("fft: n_points must be a power of two");
  if (!(lambda_max > 0.0)) throw DomainError("fft: lambda_max must be positive");
  detail::probe_damping(g, alpha);

  const double eta = lambda_max / n;
  const double dk = 2.0 * std::numbers::pi / lambda_max;
  const double k0 = centre - 0.5 * n * dk;
  std::vector<cplx> in(n), out;
  parallel_for(n, [&](long j) {
    const double v = eta * j;
    const double simpson = (j == 0) ? 1.0 / 3.0 : (j % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
    in[j] = std::exp(cplx(0.0, -v * k0)) * detail::damped_psi(g, alpha, v) * eta * simpson;
  });
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  std::vector<StrikePrice> res(n);
  for (int u = 0; u < n; ++u) {
    const double k = k0 + u * dk;
    res[u] = {std::exp(k), std::exp(-alpha * k) / std::numbers::pi * out[u].real()};
  }
  return res;
}

}  // namespace wishfx
