#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage error, 3 invalid
// input data, 4 numerical failure. Data goes to --out (or stdout),
// diagnostics to stderr.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wishfx/analytics.hpp"
#include "wishfx/calibrate.hpp"
#include "wishfx/expansion.hpp"
#include "wishfx/fx_pricer.hpp"
#include "wishfx/mc.hpp"
#include "wishfx/model_io.hpp"
#include "wishfx/parallel.hpp"
#include "wishfx/rates.hpp"

namespace wishfx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

namespace detail {

inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

template <typename... T>
std::string csv_row(const T&... cells) {
  std::string out;
  auto add = [&out](const auto& c) {
    if (!out.empty()) out += ',';
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(c)>>)
      out += num(static_cast<double>(c));
    else
      out += c;
  };
  (add(cells), ...);
  return out + '\n';
}

struct Globals {
  std::string params;
  std::uint64_t seed = 42;
  int threads = 0;
  std::string out;
};

struct PairArgs {
  std::string pair = "USD/EUR";
  double spot = 0.0;

  void add(CLI::App* sub) {
    sub->add_option("--pair", pair, "Currency pair DOM/FOR")->capture_default_str();
    sub->add_option("--spot", spot, "Spot price of FOR in DOM")->required();
  }
};

inline ModelDoc load_params(const Globals& g) {
  if (g.params.empty()) throw DataError("--params is required for this command");
  return load_model(g.params);
}

inline nlohmann::json matrix_json(const RMat& m) { return wishfx::detail::matrix_to_json(m); }

inline void write_json(std::ostream& os, const nlohmann::json& j) { os << j.dump(2) << '\n'; }

// Model strike at which a forward delta is quoted with the model's own vol.
inline double model_delta_strike(const FourierSlice& slice, double delta, double fwd, double df, double tau) {
  double vol = 0.1;
  for (int it = 0; it < 200; ++it) {
    const double k = delta_to_strike(delta, fwd, vol, tau);
    const double next = implied_vol(slice.value(std::log(k)), fwd, k, tau, df);
    const bool done = std::abs(next - vol) < 1e-13;
    vol = next;
    if (done) break;
  }
  return delta_to_strike(delta, fwd, vol, tau);
}

}  // namespace detail

/// Runs the command line with explicit streams (for embedding and tests).
inline int run(const std::vector<std::string>& args, std::ostream& stdout_, std::ostream& stderr_) {
  using detail::csv_row;
  using detail::num;
  using nlohmann::json;

  CLI::App app{"Wishart multi-currency FX and short-rate model"};
  app.require_subcommand(1);
  detail::Globals g;
  app.add_option("--params", g.params, "Model parameter file (JSON)");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "Output file (default: standard output)");

  // price-fx
  auto* px = app.add_subcommand("price-fx", "European FX option price and implied vol");
  detail::PairArgs px_pair;
  px_pair.add(px);
  double px_strike = 0.0, px_tau = 0.0;
  bool px_put = false;
  px->add_option("--strike", px_strike, "Strike")->required();
  px->add_option("--tau", px_tau, "Maturity in years")->required();
  px->add_flag("--put", px_put, "Price a put instead of a call");

  // surface
  auto* sf = app.add_subcommand("surface", "Implied-vol surface on a maturity x delta grid");
  detail::PairArgs sf_pair;
  sf_pair.add(sf);
  std::vector<double> sf_taus, sf_deltas{-0.10, -0.25, 0.50, 0.25, 0.10};
  sf->add_option("--taus", sf_taus, "Maturities")->required()->delimiter(',');
  sf->add_option("--deltas", sf_deltas, "Forward deltas (negative for puts)")->delimiter(',')->capture_default_str();

  // price-zcb
  auto* zb = app.add_subcommand("price-zcb", "Zero-coupon bond prices");
  std::string zb_ccy;
  std::vector<double> zb_taus;
  zb->add_option("--currency", zb_ccy, "Currency label")->required();
  zb->add_option("--tau", zb_taus, "Maturities")->required()->delimiter(',');

  // yield-curve
  auto* yc = app.add_subcommand("yield-curve", "Continuously compounded zero yields");
  std::string yc_ccy;
  std::vector<double> yc_tenors{0.25, 0.5, 1, 2, 3, 5, 7, 10, 15, 20};
  yc->add_option("--currency", yc_ccy, "Currency label")->required();
  yc->add_option("--tenors", yc_tenors, "Tenors")->delimiter(',')->capture_default_str();

  // price-cap
  auto* cp = app.add_subcommand("price-cap", "Cap as a strip of caplets");
  std::string cp_ccy;
  double cp_start = 0.25, cp_accrual = 0.25, cp_rate = 0.0, cp_notional = 1.0;
  int cp_periods = 4;
  cp->add_option("--currency", cp_ccy, "Currency label")->required();
  cp->add_option("--start", cp_start, "First reset date")->capture_default_str();
  cp->add_option("--accrual", cp_accrual, "Period length")->capture_default_str();
  cp->add_option("--periods", cp_periods, "Number of caplets")->capture_default_str();
  cp->add_option("--strike-rate", cp_rate, "Cap rate (simple)")->required();
  cp->add_option("--notional", cp_notional, "Notional")->capture_default_str();

  // analytics
  auto* an = app.add_subcommand("analytics", "Instantaneous variances and correlations at the initial state");
  detail::PairArgs an_pair;
  an_pair.add(an);

  // expand
  auto* ex = app.add_subcommand("expand", "Small vol-of-vol expansion against Fourier prices (constant rates)");
  detail::PairArgs ex_pair;
  ex_pair.add(ex);
  std::string ex_mode = "price";
  double ex_tau = 0.0, ex_alpha = 1.0;
  std::vector<double> ex_strikes;
  ex->add_option("--mode", ex_mode, "price or impvol")->check(CLI::IsMember({"price", "impvol"}))->capture_default_str();
  ex->add_option("--tau", ex_tau, "Maturity")->required();
  ex->add_option("--alpha", ex_alpha, "Vol-of-vol scale")->capture_default_str();
  ex->add_option("--strikes", ex_strikes, "Strikes")->required()->delimiter(',');

  // simulate
  auto* sm = app.add_subcommand("simulate", "Monte Carlo summary under one currency's measure");
  detail::PairArgs sm_pair;
  sm_pair.add(sm);
  double sm_horizon = 1.0;
  SimConfig sm_cfg;
  std::vector<double> sm_strikes;
  bool sm_no_anti = false;
  std::string sm_measure;
  sm->add_option("--horizon", sm_horizon, "Horizon in years")->capture_default_str();
  sm->add_option("--paths", sm_cfg.n_paths, "Number of paths")->capture_default_str();
  sm->add_option("--steps-per-year", sm_cfg.n_steps_per_year, "Time steps per year")->capture_default_str();
  sm->add_option("--strikes", sm_strikes, "Call strikes")->delimiter(',');
  sm->add_option("--measure", sm_measure, "Pricing currency (default: domestic)");
  sm->add_flag("--no-antithetic", sm_no_anti, "Disable antithetic pairs");

  // calibrate
  auto* cb = app.add_subcommand("calibrate", "Fit to an implied-vol surface and both yield curves");
  std::string cb_surface, cb_dom, cb_for, cb_init, cb_report, cb_pair = "USD/EUR";
  double cb_spot = 0.0, cb_max_seconds = 0.0;
  CalibWeights cb_w;
  std::vector<std::string> cb_free{"all"};
  int cb_max_iter = 500;
  cb->add_option("--surface", cb_surface, "Vol surface CSV (tau,coord_type,coord,vol)")->required();
  cb->add_option("--curve-dom", cb_dom, "Domestic yield curve CSV (tenor,yield)")->required();
  cb->add_option("--curve-for", cb_for, "Foreign yield curve CSV (tenor,yield)")->required();
  cb->add_option("--init", cb_init, "Initial parameter file")->required();
  cb->add_option("--pair", cb_pair, "Currency pair DOM/FOR")->capture_default_str();
  cb->add_option("--spot", cb_spot, "Spot")->required();
  cb->add_option("--report", cb_report, "Residual report CSV");
  cb->add_option("--free", cb_free, "Free parameter groups")->delimiter(',')->capture_default_str();
  cb->add_option("--w-fx", cb_w.w_fx, "Weight of vol residuals")->capture_default_str();
  cb->add_option("--w-ir", cb_w.w_ir, "Weight of yield residuals")->capture_default_str();
  cb->add_option("--max-iter", cb_max_iter, "Iteration cap")->capture_default_str();
  cb->add_option("--max-seconds", cb_max_seconds, "Wall-clock cap (0 = none)")->capture_default_str();

  // synth-market
  auto* sy = app.add_subcommand("synth-market", "Write a model-generated surface and curves as CSV");
  detail::PairArgs sy_pair;
  sy_pair.add(sy);
  std::string sy_surface, sy_dom, sy_for, sy_perturbed;
  double sy_rel = 0.1;
  sy->add_option("--surface-out", sy_surface, "Surface CSV")->required();
  sy->add_option("--curve-dom-out", sy_dom, "Domestic curve CSV")->required();
  sy->add_option("--curve-for-out", sy_for, "Foreign curve CSV")->required();
  sy->add_option("--perturbed-out", sy_perturbed, "Also write parameters perturbed by --rel (uses --seed)");
  sy->add_option("--rel", sy_rel, "Relative perturbation size")->capture_default_str();
  SyntheticSpec sy_spec;
  sy->add_option("--maturities", sy_spec.maturities, "Surface maturities")->delimiter(',');
  sy->add_option("--deltas", sy_spec.deltas, "Forward deltas")->delimiter(',');
  sy->add_option("--tenors", sy_spec.curve_tenors, "Curve tenors")->delimiter(',');

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, stdout_, stderr_);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, stdout_, stderr_);
  } catch (const CLI::ParseError& e) {
    app.exit(e, stdout_, stderr_);
    return kExitUsage;
  }

  std::unique_ptr<std::ofstream> file;
  std::ostream* os = &stdout_;
  auto open_out = [&] {
    if (!g.out.empty()) {
      file = std::make_unique<std::ofstream>(g.out);
      if (!*file) throw DataError("cannot write '" + g.out + "'");
      os = file.get();
    }
  };

  try {
    set_num_threads(g.threads);

    if (*px) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(px_pair.pair, px_pair.spot);
      const auto& p = doc.params;
      const auto f = fx_forward(pair, p, px_tau, p.sigma0());
      const double call = price_call_fourier(pair, p, px_strike, px_tau);
      const double price = px_put ? put_from_parity(call, pair, p, px_strike, px_tau) : call;
      const double vol = implied_vol(call, f.forward, px_strike, px_tau, f.df);
      open_out();
      *os << "pair,type,strike,tau,forward,df,price,implied_vol\n"
          << csv_row(pair.name(), px_put ? "put" : "call", px_strike, px_tau, f.forward, f.df, price, vol);
    } else if (*sf) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(sf_pair.pair, sf_pair.spot);
      const auto& p = doc.params;
      std::vector<std::string> rows(sf_taus.size());
      for (double t : sf_taus)
        if (!(t > 0.0)) throw DomainError("surface: maturities must be positive");
      for (double d : sf_deltas)
        if (!(std::abs(d) > 0.0 && std::abs(d) < 1.0)) throw DomainError("surface: deltas must lie in (-1, 1) without 0");
      parallel_for(static_cast<long>(sf_taus.size()), [&](long i) {
        const double tau = sf_taus[i];
        const MgfFn mgf = fx_mgf_fn(pair, p, tau, p.sigma0());
        const double df = mgf(0.0).real(), fwd = mgf(1.0).real() / df;
        const double sd = std::sqrt(fx_instant_var(pair, p.sigma0()) * tau);
        std::vector<double> band;
        for (int j = -12; j <= 12; ++j) band.push_back(std::log(fwd) + 0.6 * j * sd);
        const FourierSlice slice(mgf, FourierConfig{}.alpha, band, 1e-12);
        for (double delta : sf_deltas) {
          const double k = detail::model_delta_strike(slice, delta, fwd, df, tau);
          const double call = slice.value(std::log(k));
          const double vol = implied_vol(call, fwd, k, tau, df);
          const double price = delta > 0.0 ? call : call - df * (fwd - k);
          rows[i] += csv_row(tau, k, delta, price, vol);
        }
      });
      open_out();
      *os << "maturity,strike,delta,price,implied_vol\n";
      for (const auto& r : rows) *os << r;
    } else if (*zb) {
      const auto doc = detail::load_params(g);
      const auto& c = doc.currency(zb_ccy);
      std::string body;
      for (double t : zb_taus) body += csv_row(t, zcb_price(c, doc.params, doc.params.sigma0(), t));
      open_out();
      *os << "tau,price\n" << body;
    } else if (*yc) {
      const auto doc = detail::load_params(g);
      const auto curve = yield_curve(doc.currency(yc_ccy), doc.params, doc.params.sigma0(), yc_tenors);
      open_out();
      write_curve_csv(*os, curve);
    } else if (*cp) {
      const auto doc = detail::load_params(g);
      const auto spec = CapSpec::strip(cp_start, cp_accrual, cp_periods, cp_rate, cp_notional);
      const auto& c = doc.currency(cp_ccy);
      const auto prices = caplet_prices(spec, c, doc.params, doc.params.sigma0());
      json j;
      j["currency"] = cp_ccy;
      j["strike_rate"] = cp_rate;
      j["notional"] = cp_notional;
      j["caplets"] = json::array();
      double total = 0.0;
      for (std::size_t i = 0; i < prices.size(); ++i) {
        j["caplets"].push_back({{"reset", spec.reset_dates[i]}, {"pay", spec.pay_dates[i]}, {"price", prices[i]}});
        total += prices[i];
      }
      j["cap_price"] = total;
      open_out();
      detail::write_json(*os, j);
    } else if (*an) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(an_pair.pair, an_pair.spot);
      const auto& p = doc.params;
      const auto& s = p.sigma0();
      auto corr_json = [](const InstantCorrReport& r) {
        return json{{"var_fx", r.var_fx}, {"var_rate", r.var_rate}, {"covar", r.covar}, {"corr", r.corr}};
      };
      json j;
      j["pair"] = pair.name();
      j["fx_instant_var"] = fx_instant_var(pair, s);
      j["fx_instant_vol"] = std::sqrt(fx_instant_var(pair, s));
      j["skew_corr"] = skew_corr(pair, p, s);
      j["rate_fx"] = corr_json(rate_fx_corr(pair, p, s));
      j["rate_var"] = corr_json(rate_var_corr(pair, p, s));
      j["short_rates"] = json::object();
      for (const auto& c : doc.currencies) j["short_rates"][c.label] = short_rate(c, s);
      // Covariances of all pairs quoted against the domestic currency.
      json cov = json::object();
      for (const auto& a : doc.currencies)
        for (const auto& b : doc.currencies) {
          if (a.label == pair.dom.label || b.label == pair.dom.label) continue;
          const FxPairSpec pa(pair.dom, a, 1.0), pb(pair.dom, b, 1.0);
          cov[pa.name() + "|" + pb.name()] = fx_instant_cov(pa, pb, s);
        }
      j["fx_instant_cov"] = cov;
      j["warnings"] = p.warnings();
      open_out();
      detail::write_json(*os, j);
    } else if (*ex) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(ex_pair.pair, ex_pair.spot);
      const auto& p = doc.params;
      const auto& s = p.sigma0();
      const auto scaled = scaled_params(p, pair.dom, ex_alpha);
      const auto f = fx_forward(pair, scaled, ex_tau, s);
      std::vector<double> logk;
      for (double k : ex_strikes) {
        if (!(k > 0.0)) throw DomainError("expand: strikes must be positive");
        logk.push_back(std::log(k));
      }
      const FourierSlice slice(fx_mgf_fn(pair, scaled, ex_tau, s), FourierConfig{}.alpha, logk, 1e-12);
      std::string body;
      for (std::size_t i = 0; i < ex_strikes.size(); ++i) {
        const double k = ex_strikes[i];
        const double ref = slice.value(logk[i]);
        if (ex_mode == "price") {
          body += csv_row(k, price_expansion(pair, p, s, pair.spot, k, ex_tau, ex_alpha), ref);
        } else {
          const double mf = std::log(f.forward / k);
          const double full = std::sqrt(impvar_expansion(pair, p, s, mf, ex_tau, ex_alpha));
          const double shortm = std::sqrt(shortmat_impvar(pair, p, s, mf, ex_tau, ex_alpha));
          body += csv_row(k, full, shortm, implied_vol(ref, f.forward, k, ex_tau, f.df));
        }
      }
      open_out();
      *os << (ex_mode == "price" ? "strike,price_expansion,price_fourier\n"
                                 : "strike,impvol_expansion,impvol_short_maturity,impvol_fourier\n")
          << body;
    } else if (*sm) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(sm_pair.pair, sm_pair.spot);
      const auto& p = doc.params;
      sm_cfg.seed = g.seed;
      sm_cfg.antithetic = !sm_no_anti;
      sm_cfg.store_sigma = true;
      const auto& measure_ccy = sm_measure.empty() ? pair.dom : doc.currency(sm_measure);
      const auto measure = to_measure(p, measure_ccy);
      const auto b = simulate(p, doc.currencies, {pair}, measure, sm_horizon, sm_cfg);
      const int m = b.currency_index(measure_ccy.label);
      auto est = [](const McEstimate& e) { return json{{"mean", e.mean}, {"std_err", e.std_err}}; };
      json j;
      j["pair"] = pair.name();
      j["measure"] = measure_ccy.label;
      j["horizon"] = sm_horizon;
      j["paths"] = b.n_paths;
      j["steps"] = b.n_steps;
      j["antithetic"] = b.antithetic;
      j["seed"] = g.seed;
      j["clamp_events"] = b.clamp_events;
      const int d = b.dim;
      RMat mean(d, d), se(d, d);
      for (int k = 0; k < d * d; ++k) {
        const auto e = mc_mean(b, [&](long i) { return b.sigma_T(i, k); });
        mean(k % d, k / d) = e.mean;
        se(k % d, k / d) = e.std_err;
      }
      j["sigma_mean"] = {{"mc", detail::matrix_json(mean)},
                         {"std_err", detail::matrix_json(se)},
                         {"ode", detail::matrix_json(wishart_mean_rk4(p, measure, sm_horizon, 400))}};
      j["discount_bond"] = est(mc_mean(b, [&](long i) { return std::exp(-b.int_rate(i, m)); }));
      j["discount_bond"]["transform"] = zcb_price(measure_ccy, p, p.sigma0(), sm_horizon);
      j["fx_expectation"] = est(mc_mean(b, [&](long i) { return std::exp(b.log_fx(i, 0)); }));
      j["calls"] = json::array();
      if (measure_ccy.label == pair.dom.label) {
        for (double k : sm_strikes) {
          auto e = est(mc_price_call(b, 0, k, m));
          e["strike"] = k;
          j["calls"].push_back(e);
        }
      } else if (!sm_strikes.empty()) {
        stderr_ << "note: call prices are reported only under the domestic measure\n";
      }
      open_out();
      detail::write_json(*os, j);
    } else if (*cb) {
      const auto doc = load_model(cb_init);
      CalibProblem prob;
      prob.surface = read_surface_csv(cb_surface);
      prob.curve_dom = read_curve_csv(cb_dom);
      prob.curve_for = read_curve_csv(cb_for);
      prob.spot = cb_spot;
      prob.weights = cb_w;
      prob.free_mask = 0;
      for (const auto& name : cb_free) prob.free_mask |= param::from_name(name);
      const auto pair = doc.pair(cb_pair, cb_spot);
      const ModelState init{doc.params, pair.dom, pair.for_, cb_spot};
      CalibOptions opt;
      opt.max_iter = cb_max_iter;
      opt.max_seconds = cb_max_seconds;
      opt.on_iteration = [&](int it, double f) { stderr_ << "iter " << it << " objective " << num(f) << '\n'; };
      const auto res = calibrate(prob, init, opt);
      stderr_ << "status " << res.status << ", " << res.iterations << " iterations, objective "
              << num(res.final.value) << ", vol RMSE " << num(res.vol_rmse()) << ", yield RMSE "
              << num(res.yield_rmse()) << '\n';

      ModelDoc out = doc;
      out.params = res.fitted.params;
      for (auto& c : out.currencies) {
        if (c.label == res.fitted.dom.label) c = res.fitted.dom;
        if (c.label == res.fitted.for_.label) c = res.fitted.for_;
      }
      open_out();
      detail::write_json(*os, model_to_json(out));

      if (!cb_report.empty()) {
        std::ofstream rep(cb_report);
        if (!rep) throw DataError("cannot write '" + cb_report + "'");
        rep << "kind,tau,coord,market,model,residual\n";
        const auto& r = res.final.raw;
        int i = 0;
        for (; i < res.final.n_vol; ++i) {
          const auto& q = prob.surface.quotes[i];
          rep << csv_row(q.type == QuoteType::delta ? "vol_delta" : "vol_strike", q.tau, q.coord, q.vol,
                         q.vol + r(i), r(i));
        }
        auto curve_rows = [&](const char* kind, const YieldCurve& c) {
          for (std::size_t k = 0; k < c.tenors.size(); ++k, ++i)
            rep << csv_row(kind, c.tenors[k], "", c.yields[k], c.yields[k] + r(i), r(i));
        };
        curve_rows("yield_dom", prob.curve_dom);
        curve_rows("yield_for", prob.curve_for);
      }
    } else if (*sy) {
      const auto doc = detail::load_params(g);
      const auto pair = doc.pair(sy_pair.pair, sy_pair.spot);
      const ModelState truth{doc.params, pair.dom, pair.for_, sy_pair.spot};
      const auto md = synthetic_market(truth, sy_spec);
      auto write = [](const std::string& path, const auto& fn) {
        std::ofstream f(path);
        if (!f) throw DataError("cannot write '" + path + "'");
        fn(f);
      };
      write(sy_surface, [&](std::ostream& f) { write_surface_csv(f, md.surface); });
      write(sy_dom, [&](std::ostream& f) { write_curve_csv(f, md.curve_dom); });
      write(sy_for, [&](std::ostream& f) { write_curve_csv(f, md.curve_for); });
      if (!sy_perturbed.empty()) {
        const auto pert = perturb(truth, sy_rel, g.seed);
        ModelDoc out = doc;
        out.params = pert.params;
        for (auto& c : out.currencies) {
          if (c.label == pert.dom.label) c = pert.dom;
          if (c.label == pert.for_.label) c = pert.for_;
        }
        write(sy_perturbed, [&](std::ostream& f) { detail::write_json(f, model_to_json(out)); });
      }
    }
  } catch (const DataError& e) {
    stderr_ << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    stderr_ << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace wishfx::cli
