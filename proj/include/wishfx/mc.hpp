#pragma once

// Monte Carlo simulation of the factor S, log-FX rates and integrated short
// rates under a chosen currency measure Q^m.
//
// Scheme per step of length dt:
//   S <- Phi S Phi' + C + (sqrt(S) dW Q + Q' dW' sqrt(S)),   projected on the PSD cone
// with Phi = exp(M^m dt) and C = int_0^dt exp(M^m s) beta Q'Q exp(M^m' s) ds, so the
// conditional mean of S is exact; only the noise is Euler. Log-FX rates of a
// pair (a, b) move by
//   (r^a - r^b - Tr[D S D]/2 + Tr[D S (A_a - A_m)]) dt + Tr[D sqrt(S) dZ],  D = A_a - A_b,
// which is the Q^m form of the Q^a dynamics. W = Z R' + B sqrt(I - R R').
//
// Random numbers come from one generator per block of kBlockPaths paths,
// seeded from (seed, block index), so results do not depend on the number of
// worker threads.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <type_traits>
#include <vector>

#include "wishfx/matrix_core.hpp"
#include "wishfx/model.hpp"
#include "wishfx/parallel.hpp"

namespace wishfx {

struct SimConfig {
  long n_paths = 100000;
  int n_steps_per_year = 63;  // dt = 4/252
  std::uint64_t seed = 42;
  bool antithetic = true;
  bool store_sigma = false;

  void validate() const {
    if (n_paths < 1) throw DomainError("SimConfig: n_paths must be >= 1");
    if (antithetic && (n_paths < 2 || n_paths % 2 != 0))
      throw DomainError("SimConfig: antithetic sampling needs an even number of paths");
    if (n_steps_per_year < 1) throw DomainError("SimConfig: n_steps_per_year must be >= 1");
  }
};

struct PathBundle {
  long n_paths = 0;
  bool antithetic = false;
  int dim = 0;
  std::vector<std::string> pair_names;
  std::vector<std::string> currency_labels;
  Eigen::MatrixXd log_fx;    // n_paths x pairs, terminal log S
  Eigen::MatrixXd int_rate;  // n_paths x currencies, int_0^T r ds
  Eigen::MatrixXd sigma_T;   // n_paths x d*d (column-major), if requested
  long clamp_events = 0;     // eigenvalues clamped to zero across all steps
  int n_steps = 0;

  int pair_index(const std::string& name) const {
    for (std::size_t i = 0; i < pair_names.size(); ++i)
      if (pair_names[i] == name) return static_cast<int>(i);
    throw DataError("PathBundle: no pair '" + name + "'");
  }
  int currency_index(const std::string& label) const {
    for (std::size_t i = 0; i < currency_labels.size(); ++i)
      if (currency_labels[i] == label) return static_cast<int>(i);
    throw DataError("PathBundle: no currency '" + label + "'");
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_err = 0.0;
};

namespace detail {

inline constexpr long kBlockPaths = 1024;

struct SimPlan {
  int d = 0;
  int n_steps = 0;
  double dt = 0.0;
  RMat phi, c, q, rt, sqrt_irr, sigma0;
  struct Pair {
    RMat diff;   // A_a - A_b
    RMat tilt;   // A_a - A_m
    double x0;
    double h_a, h_b;
    RMat H_a, H_b;
  };
  std::vector<Pair> pairs;
  std::vector<double> h;
  std::vector<RMat> H;
};

// Van Loan: exp([[-M, bQ'Q], [0, M']] dt) yields int_0^dt e^{Ms} bQ'Q e^{M's} ds.
inline void wishart_step_moments(const RMat& m, const RMat& omega, double dt, RMat& phi, RMat& c) {
  const int d = static_cast<int>(m.rows());
  RBlock blk = RBlock::Zero(2 * d, 2 * d);
  blk.topLeftCorner(d, d) = -m;
  blk.topRightCorner(d, d) = omega;
  blk.bottomRightCorner(d, d) = m.transpose();
  const RBlock e = expm((dt * blk).eval());
  phi = e.bottomRightCorner(d, d).transpose();
  c = phi * e.topRightCorner(d, d);
  c = 0.5 * (c + c.transpose());
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

template <int D>
struct Kernel {
  using Mat = std::conditional_t<D == Eigen::Dynamic, RMat, Eigen::Matrix<double, D, D>>;

  static void sqrt_and_project(Mat& s, Mat& sq, long& clamps) {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    if constexpr (D == 2 || D == 3)
      es.computeDirect(s);
    else
      es.compute(s);
    auto lam = es.eigenvalues().eval();
    bool clamped = false;
    for (int i = 0; i < lam.size(); ++i)
      if (lam(i) < 0.0) lam(i) = 0.0, clamped = true, ++clamps;
    const Mat& v = es.eigenvectors();
    if (clamped) s = v * lam.asDiagonal() * v.transpose();
    sq = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  }

  static void run_block(const SimPlan& plan, long first, long count, bool antithetic, bool store_sigma,
                        std::mt19937_64& rng, PathBundle& out, long& clamps) {
    const int d = plan.d;
    const Mat phi = plan.phi, c = plan.c, q = plan.q, rt = plan.rt, sirr = plan.sqrt_irr, s0 = plan.sigma0;
    const double dt = plan.dt, sdt = std::sqrt(dt);
    const std::size_t np = plan.pairs.size(), nc = plan.h.size();
    std::vector<Mat> diff(np), tilt(np), ha(np), hb(np), hc(nc);
    for (std::size_t k = 0; k < np; ++k) {
      diff[k] = plan.pairs[k].diff;
      tilt[k] = plan.pairs[k].tilt;
      ha[k] = plan.pairs[k].H_a;
      hb[k] = plan.pairs[k].H_b;
    }
    for (std::size_t k = 0; k < nc; ++k) hc[k] = plan.H[k];

    Mat s0_sq;
    {
      Mat tmp = s0;
      long dummy = 0;
      sqrt_and_project(tmp, s0_sq, dummy);
    }

    std::normal_distribution<double> normal;
    const int group = antithetic ? 2 : 1;
    Mat z(d, d), b(d, d);
    for (long path = first; path < first + count; path += group) {
      Mat s[2] = {s0, s0}, sq[2] = {s0_sq, s0_sq};
      std::vector<double> x(2 * np), ir(2 * nc, 0.0), rprev(2 * nc);
      for (int g = 0; g < group; ++g) {
        for (std::size_t k = 0; k < np; ++k) x[g * np + k] = plan.pairs[k].x0;
        for (std::size_t k = 0; k < nc; ++k) rprev[g * nc + k] = plan.h[k] + trace_prod(hc[k], s0);
      }
      for (int step = 0; step < plan.n_steps; ++step) {
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) z(i, j) = sdt * normal(rng);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) b(i, j) = sdt * normal(rng);
        for (int g = 0; g < group; ++g) {
          const double sign = g == 0 ? 1.0 : -1.0;
          const Mat zg = sign * z;
          const Mat w = zg * rt + sign * b * sirr;
          Mat& sg = s[g];
          for (std::size_t k = 0; k < np; ++k) {
            const Mat ds = diff[k] * sg;
            const double drift = plan.pairs[k].h_a + trace_prod(ha[k], sg) - plan.pairs[k].h_b -
                                 trace_prod(hb[k], sg) - 0.5 * trace_prod(ds, diff[k]) + trace_prod(ds, tilt[k]);
            x[g * np + k] += drift * dt + trace_prod((diff[k] * sq[g]).eval(), zg);
          }
          const Mat noise = sq[g] * w * q;
          Mat next = phi * sg * phi.transpose() + c + noise + noise.transpose();
          next = 0.5 * (next + next.transpose());
          sqrt_and_project(next, sq[g], clamps);
          if (!next.allFinite()) throw SimulationError("simulate: non-finite state", step);
          sg = next;
          for (std::size_t k = 0; k < nc; ++k) {
            const double r = plan.h[k] + trace_prod(hc[k], sg);
            ir[g * nc + k] += 0.5 * (rprev[g * nc + k] + r) * dt;
            rprev[g * nc + k] = r;
          }
        }
      }
      for (int g = 0; g < group; ++g) {
        const long row = path + g;
        for (std::size_t k = 0; k < np; ++k) out.log_fx(row, k) = x[g * np + k];
        for (std::size_t k = 0; k < nc; ++k) out.int_rate(row, k) = ir[g * nc + k];
        if (store_sigma)
          for (int i = 0; i < d * d; ++i) out.sigma_T(row, i) = s[g](i % d, i / d);
      }
    }
  }
};

}  // namespace detail

/// Simulates to `horizon` under the measure `measure`, whose currency must be
/// among `currencies`. Integrated short rates are reported for every entry of
/// `currencies`; terminal log-FX for every pair.
inline PathBundle simulate(const WishartParams& p, const std::vector<CurrencySpec>& currencies,
                           const std::vector<FxPairSpec>& pairs, const MeasureContext& measure, double horizon,
                           const SimConfig& cfg) {
  cfg.validate();
  if (!(horizon > 0.0)) throw DomainError("simulate: horizon must be positive");
  const CurrencySpec* mcur = nullptr;
  for (const auto& c : currencies) {
    require_dim(p, c);
    if (c.label == measure.label()) mcur = &c;
  }
  if (!mcur) throw DomainError("simulate: measure currency '" + measure.label() + "' is not among the currencies");
  const RMat expected = to_measure(p, *mcur).M_eff();
  if ((expected - measure.M_eff()).cwiseAbs().maxCoeff() > 1e-12)
    throw DomainError("simulate: measure context does not belong to these parameters");

  const int d = p.dim();
  detail::SimPlan plan;
  plan.d = d;
  plan.n_steps = std::max(1, static_cast<int>(std::ceil(horizon * cfg.n_steps_per_year - 1e-9)));
  plan.dt = horizon / plan.n_steps;
  detail::wishart_step_moments(measure.M_eff(), p.beta() * p.QtQ(), plan.dt, plan.phi, plan.c);
  plan.q = p.Q();
  plan.rt = p.R().transpose();
  plan.sqrt_irr =
      sqrtm_psd(PsdMat(SymMat::from_lower(RMat::Identity(d, d) - p.R() * p.R().transpose()))).matrix();
  plan.sigma0 = p.sigma0().matrix();
  for (const auto& pr : pairs) {
    require_dim(p, pr.dom);
    require_dim(p, pr.for_);
    plan.pairs.push_back({pr.diff(), pr.dom.A.matrix() - mcur->A.matrix(), std::log(pr.spot), pr.dom.h, pr.for_.h,
                          pr.dom.H.matrix(), pr.for_.H.matrix()});
  }
  for (const auto& c : currencies) {
    plan.h.push_back(c.h);
    plan.H.push_back(c.H.matrix());
  }

  PathBundle out;
  out.n_paths = cfg.n_paths;
  out.antithetic = cfg.antithetic;
  out.dim = d;
  out.n_steps = plan.n_steps;
  for (const auto& pr : pairs) out.pair_names.push_back(pr.name());
  for (const auto& c : currencies) out.currency_labels.push_back(c.label);
  out.log_fx.resize(cfg.n_paths, static_cast<long>(pairs.size()));
  out.int_rate.resize(cfg.n_paths, static_cast<long>(currencies.size()));
  if (cfg.store_sigma) out.sigma_T.resize(cfg.n_paths, d * d);

  const long n_blocks = (cfg.n_paths + detail::kBlockPaths - 1) / detail::kBlockPaths;
  std::vector<long> clamps(n_blocks, 0);
  parallel_for(n_blocks, [&](long blk) {
    const long first = blk * detail::kBlockPaths;
    const long count = std::min(detail::kBlockPaths, cfg.n_paths - first);
    std::mt19937_64 rng(detail::splitmix64(cfg.seed ^ detail::splitmix64(static_cast<std::uint64_t>(blk) + 1)));
    switch (d) {
      case 1: detail::Kernel<1>::run_block(plan, first, count, cfg.antithetic, cfg.store_sigma, rng, out, clamps[blk]); break;
      case 2: detail::Kernel<2>::run_block(plan, first, count, cfg.antithetic, cfg.store_sigma, rng, out, clamps[blk]); break;
      case 3: detail::Kernel<3>::run_block(plan, first, count, cfg.antithetic, cfg.store_sigma, rng, out, clamps[blk]); break;
      default:
        detail::Kernel<Eigen::Dynamic>::run_block(plan, first, count, cfg.antithetic, cfg.store_sigma, rng, out,
                                                  clamps[blk]);
    }
  });
  for (long c : clamps) out.clamp_events += c;
  return out;
}

/// Mean and standard error of f(path). With antithetic sampling the two
/// members of each pair are averaged into one sample first.
template <typename F>
McEstimate mc_mean(const PathBundle& bundle, const F& f) {
  if (bundle.n_paths < 2) throw DomainError("mc_mean: need at least two paths");
  const long group = bundle.antithetic ? 2 : 1;
  const long n = bundle.n_paths / group;
  double mean = 0.0, m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double y = 0.0;
    for (long g = 0; g < group; ++g) y += f(i * group + g);
    y /= group;
    const double delta = y - mean;
    mean += delta / (i + 1);
    m2 += delta * (y - mean);
  }
  return {mean, std::sqrt(m2 / (n - 1) / n)};
}

/// Discounted call (or put) on pair `pair_idx`, discounted with the integrated
/// short rate of currency `discount_idx`.
inline McEstimate mc_price_call(const PathBundle& bundle, int pair_idx, double strike, int discount_idx,
                                bool put = false) {
  if (bundle.n_paths == 0) throw DomainError("mc_price_call: empty bundle");
  return mc_mean(bundle, [&](long i) {
    const double s = std::exp(bundle.log_fx(i, pair_idx));
    const double payoff = put ? std::max(strike - s, 0.0) : std::max(s - strike, 0.0);
    return std::exp(-bundle.int_rate(i, discount_idx)) * payoff;
  });
}

/// First moment E[S(T)] under M_eff from dE/dt = beta Q'Q + M E + E M' (RK4).
inline RMat wishart_mean_rk4(const WishartParams& p, const MeasureContext& measure, double horizon, int n_steps) {
  const RMat omega = p.beta() * p.QtQ();
  const RMat& m = measure.M_eff();
  auto f = [&](const RMat& e) -> RMat { return omega + m * e + e * m.transpose(); };
  RMat e = p.sigma0().matrix();
  const double h = horizon / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    const RMat k1 = f(e), k2 = f(e + 0.5 * h * k1), k3 = f(e + 0.5 * h * k2), k4 = f(e + h * k3);
    e += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return e;
}

/// One step of length dt from `sigma` for many independent draws; returns
/// per-draw increments of (log S, short rate of pair.dom, Tr[D S D]). Used to
/// estimate instantaneous covariations.
inline Eigen::MatrixXd instant_increments(const WishartParams& p, const FxPairSpec& pair, const PsdMat& sigma,
                                          double dt, long n, std::uint64_t seed) {
  const WishartParams ps = p.with_sigma0(sigma);
  SimConfig cfg;
  cfg.n_paths = n;
  cfg.antithetic = false;
  cfg.seed = seed;
  cfg.store_sigma = true;
  cfg.n_steps_per_year = static_cast<int>(std::lround(1.0 / dt));
  const auto bundle = simulate(ps, {pair.dom, pair.for_}, {pair}, to_measure(ps, pair.dom), dt, cfg);
  const int d = p.dim();
  const RMat diff = pair.diff();
  const double r0 = short_rate(pair.dom, sigma), v0 = trace_prod((diff * sigma.matrix()).eval(), diff);
  Eigen::MatrixXd out(n, 3);
  for (long i = 0; i < n; ++i) {
    RMat s(d, d);
    for (int k = 0; k < d * d; ++k) s(k % d, k / d) = bundle.sigma_T(i, k);
    out(i, 0) = bundle.log_fx(i, 0) - std::log(pair.spot);
    out(i, 1) = pair.dom.h + trace_prod(pair.dom.H.matrix(), s) - r0;
    out(i, 2) = trace_prod((diff * s).eval(), diff) - v0;
  }
  return out;
}

}  // namespace wishfx
