#pragma once

// Joint fit of one FX implied-vol surface and the two yield curves of the
// pair by Levenberg-Marquardt on the residual vector
//   [sqrt(w_fx) (vol_model - vol_mkt) ..., sqrt(w_ir) (y_dom_model - y_dom_mkt) ...,
//    sqrt(w_ir) (y_for_model - y_for_mkt) ...].
// Parameters are optimised in unconstrained coordinates:
//   beta = d + 1 + softplus(t), R = X tanh(|X|_2) / |X|_2,
//   sigma0 = L L', H = L L' with L symmetric, M, Q, A, h free.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wishfx/fx_pricer.hpp"
#include "wishfx/model_io.hpp"
#include "wishfx/rates.hpp"

namespace wishfx {

enum class QuoteType { delta, strike };

struct VolQuote {
  double tau;
  QuoteType type;
  double coord;  // signed delta (call > 0, put < 0) or strike
  double vol;
};

struct VolSurface {
  std::vector<VolQuote> quotes;

  void validate() const {
    if (quotes.empty()) throw DataError("VolSurface: no quotes");
    for (std::size_t i = 0; i < quotes.size(); ++i) {
      const auto& q = quotes[i];
      if (!(q.tau > 0.0)) throw DataError("VolSurface: tau must be positive");
      if (!(q.vol > 0.0)) throw DataError("VolSurface: vols must be positive");
      if (q.type == QuoteType::delta && !(std::abs(q.coord) > 0.0 && std::abs(q.coord) < 1.0))
        throw DataError("VolSurface: delta must lie in (-1, 1) without 0");
      if (q.type == QuoteType::strike && !(q.coord > 0.0)) throw DataError("VolSurface: strike must be positive");
      for (std::size_t k = 0; k < i; ++k)
        if (quotes[k].tau == q.tau && quotes[k].type == q.type && quotes[k].coord == q.coord)
          throw DataError("VolSurface: duplicate quote");
    }
  }

  std::vector<double> maturities() const {
    std::vector<double> out;
    for (const auto& q : quotes)
      if (std::find(out.begin(), out.end(), q.tau) == out.end()) out.push_back(q.tau);
    std::sort(out.begin(), out.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV I/O

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (header) {
      header = false;
      continue;
    }
    if (cells.size() != columns)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(where + ": not a number '" + s + "'");
  }
}

// Shortest representation that reads back to the same double.
inline std::string fmt(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

}  // namespace detail

/// CSV `tau,coord_type,coord,vol` with coord_type in {delta, strike}.
inline VolSurface read_surface_csv(const std::string& path) {
  VolSurface s;
  int row = 1;
  for (const auto& r : detail::read_csv(path, 4)) {
    const std::string where = path + " row " + std::to_string(row++);
    QuoteType t;
    if (r[1] == "delta")
      t = QuoteType::delta;
    else if (r[1] == "strike")
      t = QuoteType::strike;
    else
      throw DataError(where + ": coord_type must be delta or strike");
    s.quotes.push_back({detail::parse_double(r[0], where), t, detail::parse_double(r[2], where),
                        detail::parse_double(r[3], where)});
  }
  s.validate();
  return s;
}

inline void write_surface_csv(std::ostream& os, const VolSurface& s) {
  os << "tau,coord_type,coord,vol\n";
  for (const auto& q : s.quotes)
    os << detail::fmt(q.tau) << ',' << (q.type == QuoteType::delta ? "delta" : "strike") << ','
       << detail::fmt(q.coord) << ',' << detail::fmt(q.vol) << '\n';
}

/// CSV `tenor,yield`.
inline YieldCurve read_curve_csv(const std::string& path) {
  YieldCurve c;
  int row = 1;
  for (const auto& r : detail::read_csv(path, 2)) {
    const std::string where = path + " row " + std::to_string(row++);
    c.tenors.push_back(detail::parse_double(r[0], where));
    c.yields.push_back(detail::parse_double(r[1], where));
  }
  if (c.tenors.empty()) throw DataError(path + ": empty curve");
  c.validate();
  return c;
}

inline void write_curve_csv(std::ostream& os, const YieldCurve& c) {
  os << "tenor,yield\n";
  for (std::size_t i = 0; i < c.tenors.size(); ++i) os << detail::fmt(c.tenors[i]) << ',' << detail::fmt(c.yields[i]) << '\n';
}

/// Linear in yield between tenors, flat outside.
inline double interpolate_yield(const YieldCurve& c, double t) {
  if (t <= c.tenors.front()) return c.yields.front();
  if (t >= c.tenors.back()) return c.yields.back();
  const auto it = std::upper_bound(c.tenors.begin(), c.tenors.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - c.tenors.begin());
  const double w = (t - c.tenors[i - 1]) / (c.tenors[i] - c.tenors[i - 1]);
  return (1.0 - w) * c.yields[i - 1] + w * c.yields[i];
}

// ---------------------------------------------------------------------------
// Model state and parameter masks

struct ModelState {
  WishartParams params;
  CurrencySpec dom, for_;
  double spot = 1.0;

  FxPairSpec pair() const { return FxPairSpec(dom, for_, spot); }
  ModelDoc doc() const { return {params, {dom, for_}}; }
};

namespace param {
inline constexpr unsigned beta = 1u << 0;
inline constexpr unsigned M = 1u << 1;
inline constexpr unsigned Q = 1u << 2;
inline constexpr unsigned R = 1u << 3;
inline constexpr unsigned sigma0 = 1u << 4;
inline constexpr unsigned A_dom = 1u << 5;
inline constexpr unsigned A_for = 1u << 6;
inline constexpr unsigned h_dom = 1u << 7;
inline constexpr unsigned h_for = 1u << 8;
inline constexpr unsigned H_dom = 1u << 9;
inline constexpr unsigned H_for = 1u << 10;
inline constexpr unsigned all = (1u << 11) - 1;

inline unsigned from_name(const std::string& n) {
  static const std::pair<const char*, unsigned> names[] = {
      {"beta", beta},   {"M", M},         {"Q", Q},         {"R", R},         {"sigma0", sigma0}, {"A_dom", A_dom},
      {"A_for", A_for}, {"h_dom", h_dom}, {"h_for", h_for}, {"H_dom", H_dom}, {"H_for", H_for},   {"all", all}};
  for (const auto& [name, bit] : names)
    if (n == name) return bit;
  throw DataError("unknown parameter group '" + n + "'");
}
}  // namespace param

struct CalibWeights {
  double w_fx = 1.0;
  double w_ir = 25.0;
};

struct CalibProblem {
  VolSurface surface;
  YieldCurve curve_dom, curve_for;
  double spot = 1.0;
  CalibWeights weights;
  unsigned free_mask = param::all;
  double price_tol = 1e-10;

  void validate() const {
    surface.validate();
    curve_dom.validate();
    curve_for.validate();
    if (curve_dom.tenors.empty() || curve_for.tenors.empty()) throw DataError("CalibProblem: empty yield curve");
    if (!(spot > 0.0)) throw DataError("CalibProblem: spot must be positive");
    if (!(weights.w_fx >= 0.0) || !(weights.w_ir >= 0.0) || weights.w_fx + weights.w_ir == 0.0)
      throw DataError("CalibProblem: weights must be >= 0 and not both zero");
    if ((free_mask & param::all) == 0) throw DataError("CalibProblem: no free parameters");
  }

  /// Forward implied by the market curves, used to turn delta quotes into strikes.
  double market_forward(double tau) const {
    return spot * std::exp((interpolate_yield(curve_dom, tau) - interpolate_yield(curve_for, tau)) * tau);
  }

  double quote_strike(const VolQuote& q) const {
    if (q.type == QuoteType::strike) return q.coord;
    return delta_to_strike(q.coord, market_forward(q.tau), q.vol, q.tau);
  }
};

namespace detail {

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

inline void push_sym(std::vector<double>& v, const RMat& m) {
  for (int j = 0; j < m.cols(); ++j)
    for (int i = j; i < m.rows(); ++i) v.push_back(m(i, j));
}

inline RMat pop_sym(const std::vector<double>& v, std::size_t& pos, int d) {
  RMat m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = j; i < d; ++i) m(i, j) = m(j, i) = v[pos++];
  return m;
}

inline void push_full(std::vector<double>& v, const RMat& m) {
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) v.push_back(m(i, j));
}

inline RMat pop_full(const std::vector<double>& v, std::size_t& pos, int d) {
  RMat m(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) m(i, j) = v[pos++];
  return m;
}

inline RMat r_to_free(const RMat& r) {
  const double s = Eigen::JacobiSVD<RMat>(r).singularValues()(0);
  if (s == 0.0) return r;
  if (!(s < 1.0)) throw DomainError("calibrate: initial R must have spectral norm < 1");
  return r * (std::atanh(s) / s);
}

inline RMat r_from_free(const RMat& x) {
  const double s = Eigen::JacobiSVD<RMat>(x).singularValues()(0);
  if (s == 0.0) return x;
  return x * (std::tanh(s) / s);
}

}  // namespace detail

/// Map between a ModelState and the unconstrained vector of its free groups.
class ParamCodec {
 public:
  ParamCodec(ModelState base, unsigned mask) : base_(std::move(base)), mask_(mask) {}

  std::vector<double> encode(const ModelState& s) const {
    std::vector<double> v;
    const auto& p = s.params;
    const int d = p.dim();
    if (mask_ & param::beta) {
      if (!(p.beta() > d + 1)) throw DomainError("calibrate: initial beta must exceed d + 1 strictly");
      v.push_back(detail::softplus_inv(p.beta() - (d + 1)));
    }
    if (mask_ & param::M) detail::push_full(v, p.M());
    if (mask_ & param::Q) detail::push_full(v, p.Q());
    if (mask_ & param::R) detail::push_full(v, detail::r_to_free(p.R()));
    if (mask_ & param::sigma0) detail::push_sym(v, sqrtm_psd(p.sigma0()).matrix());
    if (mask_ & param::A_dom) detail::push_sym(v, s.dom.A.matrix());
    if (mask_ & param::A_for) detail::push_sym(v, s.for_.A.matrix());
    if (mask_ & param::h_dom) v.push_back(s.dom.h);
    if (mask_ & param::h_for) v.push_back(s.for_.h);
    if (mask_ & param::H_dom) detail::push_sym(v, sqrtm_psd(s.dom.H).matrix());
    if (mask_ & param::H_for) detail::push_sym(v, sqrtm_psd(s.for_.H).matrix());
    return v;
  }

  ModelState decode(const std::vector<double>& v) const {
    const auto& b = base_.params;
    const int d = b.dim();
    std::size_t pos = 0;
    double beta = b.beta();
    RMat m = b.M(), q = b.Q(), r = b.R(), s0 = b.sigma0().matrix();
    CurrencySpec dom = base_.dom, fgn = base_.for_;
    if (mask_ & param::beta) beta = (d + 1) + detail::softplus(v[pos++]);
    if (mask_ & param::M) m = detail::pop_full(v, pos, d);
    if (mask_ & param::Q) q = detail::pop_full(v, pos, d);
    if (mask_ & param::R) r = detail::r_from_free(detail::pop_full(v, pos, d));
    if (mask_ & param::sigma0) {
      const RMat l = detail::pop_sym(v, pos, d);
      s0 = (l * l).eval();
    }
    if (mask_ & param::A_dom) dom.A = SymMat::from_full(detail::pop_sym(v, pos, d));
    if (mask_ & param::A_for) fgn.A = SymMat::from_full(detail::pop_sym(v, pos, d));
    if (mask_ & param::h_dom) dom.h = v[pos++];
    if (mask_ & param::h_for) fgn.h = v[pos++];
    if (mask_ & param::H_dom) {
      const RMat l = detail::pop_sym(v, pos, d);
      dom.H = PsdMat(SymMat::from_lower(l * l));
    }
    if (mask_ & param::H_for) {
      const RMat l = detail::pop_sym(v, pos, d);
      fgn.H = PsdMat(SymMat::from_lower(l * l));
    }
    return {WishartParams(beta, m, q, r, PsdMat(SymMat::from_lower(s0))), dom, fgn, base_.spot};
  }

 private:
  ModelState base_;
  unsigned mask_;
};

// ---------------------------------------------------------------------------
// Objective

struct ObjectiveValue {
  double value = 0.0;             // sum of squared weighted residuals
  Eigen::VectorXd residuals;      // weighted
  Eigen::VectorXd raw;            // unweighted: vol units, then yield units
  int n_vol = 0, n_dom = 0, n_for = 0;
  int n_penalized = 0;
};

inline constexpr double kCalibPenalty = 1.0;

namespace detail {

struct MaturityGroup {
  double tau;
  std::vector<std::size_t> index;  // into surface quotes / residuals
  std::vector<double> strikes;
  std::vector<double> log_strikes;
};

inline std::vector<MaturityGroup> group_quotes(const CalibProblem& prob) {
  std::vector<MaturityGroup> groups;
  for (double t : prob.surface.maturities()) {
    MaturityGroup g{t, {}, {}, {}};
    for (std::size_t i = 0; i < prob.surface.quotes.size(); ++i) {
      if (prob.surface.quotes[i].tau != t) continue;
      const double k = prob.quote_strike(prob.surface.quotes[i]);
      g.index.push_back(i);
      g.strikes.push_back(k);
      g.log_strikes.push_back(std::log(k));
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

// Evaluates residuals; with `layouts` given, prices reuse those quadrature
// nodes; with `capture`, the adaptive layouts are stored there.
class Evaluator {
 public:
  explicit Evaluator(const CalibProblem& prob) : prob_(prob), groups_(group_quotes(prob)) {}

  std::size_t n_groups() const { return groups_.size(); }

  ObjectiveValue operator()(const ModelState& s, const std::vector<FourierSlice>* layouts = nullptr,
                            std::vector<std::optional<FourierSlice>>* capture = nullptr) const {
    const auto& q = prob_.surface.quotes;
    const std::size_t nv = q.size(), nd = prob_.curve_dom.tenors.size(), nf = prob_.curve_for.tenors.size();
    ObjectiveValue out;
    out.n_vol = static_cast<int>(nv);
    out.n_dom = static_cast<int>(nd);
    out.n_for = static_cast<int>(nf);
    out.raw = Eigen::VectorXd::Zero(nv + nd + nf);
    std::vector<char> penal(nv + nd + nf, 0);
    if (capture) capture->assign(groups_.size(), std::nullopt);
    const FxPairSpec pair = s.pair();
    const FourierConfig fc;

    parallel_for(static_cast<long>(groups_.size()), [&](long gi) {
      const auto& g = groups_[gi];
      try {
        const MgfFn mgf = fx_mgf_fn(pair, s.params, g.tau, s.params.sigma0());
        const double g0 = mgf(0.0).real(), g1 = mgf(1.0).real();
        const double fwd = g1 / g0;
        std::optional<FourierSlice> slice;
        if (layouts)
          slice.emplace(mgf, (*layouts)[gi]);
        else
          slice.emplace(mgf, fc.alpha, g.log_strikes, prob_.price_tol);
        for (std::size_t j = 0; j < g.index.size(); ++j) {
          const double price = slice->value(g.log_strikes[j]);
          const double lower = g0 * std::max(fwd - g.strikes[j], 0.0);
          const double vol = implied_vol(std::clamp(price, lower, g1), fwd, g.strikes[j], g.tau, g0);
          out.raw(g.index[j]) = vol - q[g.index[j]].vol;
        }
        if (capture) (*capture)[gi] = std::move(slice);
      } catch (const std::exception&) {
        for (std::size_t idx : g.index) out.raw(idx) = kCalibPenalty, penal[idx] = 1;
      }
    });

    auto curve = [&](const CurrencySpec& c, const YieldCurve& mkt, std::size_t offset) {
      try {
        const auto model = yield_curve(c, s.params, s.params.sigma0(), mkt.tenors);
        for (std::size_t i = 0; i < mkt.tenors.size(); ++i) {
          if (!std::isfinite(model.yields[i])) throw NumericError("non-finite yield");
          out.raw(offset + i) = model.yields[i] - mkt.yields[i];
        }
      } catch (const std::exception&) {
        for (std::size_t i = 0; i < mkt.tenors.size(); ++i) out.raw(offset + i) = kCalibPenalty, penal[offset + i] = 1;
      }
    };
    curve(s.dom, prob_.curve_dom, nv);
    curve(s.for_, prob_.curve_for, nv + nd);

    out.residuals = out.raw;
    out.residuals.head(nv) *= std::sqrt(prob_.weights.w_fx);
    out.residuals.tail(nd + nf) *= std::sqrt(prob_.weights.w_ir);
    out.value = out.residuals.squaredNorm();
    for (char c : penal) out.n_penalized += c;
    return out;
  }

 private:
  const CalibProblem& prob_;
  std::vector<MaturityGroup> groups_;
};

}  // namespace detail

inline ObjectiveValue objective(const CalibProblem& prob, const ModelState& s) {
  prob.validate();
  return detail::Evaluator(prob)(s);
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt

struct CalibOptions {
  int max_iter = 500;
  double gtol = 1e-8;       // on |J' r|_inf
  double xtol = 1e-10;      // on |step| relative to |theta|
  double ftol = 1e-12;      // relative objective decrease of an accepted step
  double fd_step = 1e-6;    // relative central-difference step
  double max_seconds = 0.0; // 0 = no limit
  std::function<void(int, double)> on_iteration;
};

struct CalibResult {
  ModelState fitted;
  std::vector<double> trajectory;  // objective after each accepted step (first entry: init)
  ObjectiveValue final;
  std::string status;  // gradient | step | objective | max_iter | time_limit
  int iterations = 0;
  int evaluations = 0;
  double wall_seconds = 0.0;

  double vol_rmse() const { return rmse(0, final.n_vol); }
  double yield_rmse() const { return rmse(final.n_vol, final.n_dom + final.n_for); }

 private:
  double rmse(int start, int n) const {
    if (n == 0) return 0.0;
    return std::sqrt(final.raw.segment(start, n).squaredNorm() / n);
  }
};

inline CalibResult calibrate(const CalibProblem& prob, const ModelState& init, const CalibOptions& opt = {}) {
  prob.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  ModelState start = init;
  start.spot = prob.spot;
  const ParamCodec codec(start, prob.free_mask);
  const detail::Evaluator eval(prob);
  std::vector<double> theta = codec.encode(start);
  const long n = static_cast<long>(theta.size());

  CalibResult res;
  std::vector<std::optional<FourierSlice>> captured;
  ObjectiveValue cur = eval(codec.decode(theta), nullptr, &captured);
  ++res.evaluations;
  if (cur.n_penalized == cur.residuals.size()) throw NumericError("calibrate: no point of the objective can be priced");
  res.trajectory.push_back(cur.value);

  auto jacobian = [&](const std::vector<double>& th, const std::vector<std::optional<FourierSlice>>& cap) {
    // Reuse the quadrature of the base point so columns are smooth in theta.
    std::vector<FourierSlice> layouts;
    const std::vector<FourierSlice>* lp = nullptr;
    bool complete = true;
    for (const auto& c : cap) complete = complete && c.has_value();
    if (complete) {
      for (const auto& c : cap) layouts.push_back(*c);
      lp = &layouts;
    }
    Eigen::MatrixXd jac(cur.residuals.size(), n);
    parallel_for(n, [&](long k) {
      const double h = opt.fd_step * std::max(1.0, std::abs(th[k]));
      std::vector<double> up = th, dn = th;
      up[k] += h;
      dn[k] -= h;
      try {
        const auto ru = eval(codec.decode(up), lp).residuals;
        const auto rd = eval(codec.decode(dn), lp).residuals;
        jac.col(k) = (ru - rd) / (2.0 * h);
      } catch (const DataError&) {
        jac.col(k).setZero();  // step left the admissible set
      }
    });
    res.evaluations += static_cast<int>(2 * n);
    return jac;
  };

  Eigen::MatrixXd jac = jacobian(theta, captured);
  Eigen::MatrixXd a = jac.transpose() * jac;
  Eigen::VectorXd g = jac.transpose() * cur.residuals;
  double mu = 1e-3 * a.diagonal().maxCoeff();
  double nu = 2.0;
  res.status = "max_iter";

  for (int it = 0; it < opt.max_iter; ++it) {
    if (g.cwiseAbs().maxCoeff() < opt.gtol) {
      res.status = "gradient";
      break;
    }
    if (opt.max_seconds > 0.0 && elapsed() > opt.max_seconds) {
      res.status = "time_limit";
      break;
    }
    res.iterations = it + 1;
    const Eigen::VectorXd scale = a.diagonal().cwiseMax(1e-12);
    Eigen::MatrixXd lhs = a;
    lhs.diagonal() += mu * scale;
    const Eigen::VectorXd step = lhs.ldlt().solve(-g);
    if (!step.allFinite()) {
      res.status = "step";
      break;
    }
    const Eigen::Map<const Eigen::VectorXd> th(theta.data(), n);
    if (step.norm() < opt.xtol * (th.norm() + opt.xtol)) {
      res.status = "step";
      break;
    }
    std::vector<double> trial(theta);
    for (long k = 0; k < n; ++k) trial[k] += step(k);

    std::vector<std::optional<FourierSlice>> trial_cap;
    ObjectiveValue next;
    bool ok = true;
    try {
      next = eval(codec.decode(trial), nullptr, &trial_cap);
    } catch (const DataError&) {
      ok = false;  // left the admissible set numerically
    }
    ++res.evaluations;
    const double predicted = -(step.dot(g) * 2.0 + step.dot(a * step));
    const double rho = ok && predicted > 0.0 ? (cur.value - next.value) / predicted : -1.0;
    if (rho > 0.0) {
      const double prev = cur.value;
      theta = std::move(trial);
      cur = std::move(next);
      captured = std::move(trial_cap);
      res.trajectory.push_back(cur.value);
      if (opt.on_iteration) opt.on_iteration(it + 1, cur.value);
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      if (prev - cur.value <= opt.ftol * prev) {
        res.status = "objective";
        break;
      }
      jac = jacobian(theta, captured);
      a = jac.transpose() * jac;
      g = jac.transpose() * cur.residuals;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e32) {
        res.status = "step";
        break;
      }
    }
  }

  res.fitted = codec.decode(theta);
  res.final = cur;
  res.wall_seconds = elapsed();
  return res;
}

// ---------------------------------------------------------------------------
// Synthetic market data

struct SyntheticSpec {
  std::vector<double> maturities{1.0 / 12, 0.25, 0.5, 1, 2, 3, 5, 7, 10, 15};
  std::vector<double> deltas{-0.05, -0.10, -0.25, 0.50, 0.25, 0.10, 0.05};
  std::vector<double> curve_tenors{1.0 / 12, 0.25, 0.5, 1,  2,  3,  4,  5,  6,  7,  8, 9,
                                   10,       11,   12,  13, 14, 15, 16, 17, 18, 19, 20};
};

struct MarketData {
  VolSurface surface;
  YieldCurve curve_dom, curve_for;
  double spot = 1.0;

  CalibProblem problem(CalibWeights w = {}) const {
    CalibProblem p;
    p.surface = surface;
    p.curve_dom = curve_dom;
    p.curve_for = curve_for;
    p.spot = spot;
    p.weights = w;
    return p;
  }
};

/// Surface and curves generated by `truth`. Each delta quote carries the
/// model vol at the strike that the same vol maps the delta to (fixed point),
/// using the curve-implied forward as the objective does.
inline MarketData synthetic_market(const ModelState& truth, const SyntheticSpec& spec = {}) {
  MarketData md;
  md.spot = truth.spot;
  const auto& p = truth.params;
  md.curve_dom = yield_curve(truth.dom, p, p.sigma0(), spec.curve_tenors);
  md.curve_for = yield_curve(truth.for_, p, p.sigma0(), spec.curve_tenors);
  const FxPairSpec pair = truth.pair();
  const double atm = std::sqrt(std::max(1e-6, trace_prod((pair.diff() * p.sigma0().matrix()).eval(), pair.diff())));

  const CalibProblem conv = md.problem();
  std::vector<std::vector<VolQuote>> rows(spec.maturities.size());
  parallel_for(static_cast<long>(spec.maturities.size()), [&](long mi) {
    const double tau = spec.maturities[mi];
    const MgfFn mgf = fx_mgf_fn(pair, p, tau, p.sigma0());
    const double g0 = mgf(0.0).real(), fwd = mgf(1.0).real() / g0;
    const double sd = atm * std::sqrt(tau);
    std::vector<double> band;
    for (int i = -12; i <= 12; ++i) band.push_back(std::log(fwd) + 0.6 * i * sd);
    const FourierSlice slice(mgf, FourierConfig{}.alpha, band, 1e-13);
    auto model_vol = [&](double k) { return implied_vol(slice.value(std::log(k)), fwd, k, tau, g0); };
    for (double delta : spec.deltas) {
      double vol = atm;
      for (int it = 0; it < 200; ++it) {
        const double next = model_vol(conv.quote_strike({tau, QuoteType::delta, delta, vol}));
        const bool done = std::abs(next - vol) < 1e-14;
        vol = next;
        if (done) break;
      }
      rows[mi].push_back({tau, QuoteType::delta, delta, vol});
    }
  });
  for (auto& r : rows) md.surface.quotes.insert(md.surface.quotes.end(), r.begin(), r.end());
  return md;
}

/// Multiplies every free entry by (1 + rel * u), u uniform on [-1, 1], then
/// restores admissibility (beta > d+1, |R|_2 < 1, PSD matrices).
inline ModelState perturb(const ModelState& s, double rel, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto scal = [&](double x) { return x * (1.0 + rel * u(rng)); };
  auto mat = [&](const RMat& m) {
    RMat out = m;
    for (int j = 0; j < m.cols(); ++j)
      for (int i = 0; i < m.rows(); ++i) out(i, j) = scal(m(i, j));
    return out;
  };
  auto sym = [&](const RMat& m) {
    RMat out = m;
    for (int j = 0; j < m.cols(); ++j)
      for (int i = j; i < m.rows(); ++i) out(i, j) = out(j, i) = scal(m(i, j));
    return out;
  };
  const auto& p = s.params;
  const int d = p.dim();
  const double beta = std::max(scal(p.beta()), d + 1 + 1e-3);
  RMat r = mat(p.R());
  const double rn = Eigen::JacobiSVD<RMat>(r).singularValues()(0);
  if (rn >= 0.99) r *= 0.99 / rn;
  const RMat m = mat(p.M()), q = mat(p.Q());
  auto psd = [](const RMat& x) { return PsdMat(SymMat::from_lower(project_psd(x))); };
  const PsdMat s0 = psd(sym(p.sigma0().matrix()));
  CurrencySpec dom = s.dom, fgn = s.for_;
  dom.A = SymMat::from_full(sym(dom.A.matrix()));
  fgn.A = SymMat::from_full(sym(fgn.A.matrix()));
  dom.h = scal(dom.h);
  fgn.h = scal(fgn.h);
  dom.H = psd(sym(dom.H.matrix()));
  fgn.H = psd(sym(fgn.H.matrix()));
  return {WishartParams(beta, m, q, r, s0), dom, fgn, s.spot};
}

}  // namespace wishfx
