#include "quartic/harness.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>

#include "quartic/birman_schwinger.hpp"
#include "quartic/decay_fit.hpp"
#include "quartic/errors.hpp"
#include "quartic/parallel.hpp"
#include "quartic/propagator.hpp"
#include "quartic/resolvent_kernels.hpp"
#include "quartic/spectral_map.hpp"

namespace quartic {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* artifact_version = "1.0.0";

struct Context {
  const ExperimentConfig& cfg;
  json results = json::object();
  std::map<std::string, DecayFit> fits;
  std::vector<std::string> fit_order;
  std::string verdict;
  std::string csv;

  explicit Context(const ExperimentConfig& c) : cfg(c) {}

  void add_fit(const std::string& name, const std::vector<std::pair<double, double>>& samples) {
    if (!fits.count(name)) fit_order.push_back(name);
    fits[name] = fit_decay(samples);
  }
};

json fit_json(const std::string& name, const DecayFit& f) {
  json j;
  j["name"] = name;
  j["exponent"] = f.exponent;
  j["prefactor"] = f.prefactor;
  j["intercept"] = std::log(f.prefactor);
  j["residual"] = f.residual;
  j["reliable"] = f.reliable();
  j["window"] = {f.window_lo, f.window_hi};
  j["n_samples"] = f.n_samples;
  return j;
}

std::vector<double> window(const ExperimentConfig& c) {
  if (c.window_samples == 1) return {c.window_lo};
  return log_space(c.window_lo, c.window_hi, c.window_samples);
}

Sign parse_sign(const std::string& s) { return s == "minus" ? Sign::minus : Sign::plus; }

double op_norm(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

std::string sample_row(double t, const Geometry& g, cplx v, const std::string& corr, double err) {
  return csv_number(t) + "," + csv_number(g.r) + "," + csv_number(g.r_prime) + "," + csv_number(g.cos_gamma) + "," +
         csv_number(v.real()) + "," + csv_number(v.imag()) + "," + csv_number(std::abs(v)) + "," + corr + "," +
         csv_number(err) + "\n";
}

const char* sample_header = "t,r,r_prime,cos_gamma,re,im,abs,correction,est_error\n";

void run_classify(Context& ctx) {
  const Potential pot = make_potential(ctx.cfg);
  const RadialGrid grid = make_grid(ctx.cfg, pot);
  const Classification c = classify(pot, grid, ctx.cfg.ell_max, ctx.cfg.classify_tol);
  ctx.verdict = to_string(c.verdict);
  ctx.results["classification"] = json::parse(classification_report(c, pot, grid));
}

void run_free_decay(Context& ctx) {
  const auto ts = window(ctx.cfg);
  const int nr = ctx.cfg.geometry_count;
  if (nr < 1) throw ConfigError("geometry.count must be >= 1");
  std::vector<double> seps(nr);
  for (int k = 0; k < nr; ++k) seps[k] = nr == 1 ? 0.0 : ctx.cfg.geometry_r_max * k / (nr - 1);
  std::vector<QuadResult> vals(ts.size() * seps.size());
  parallel_for(vals.size(), [&](std::size_t i) {
    vals[i] = free_kernel(ts[i / seps.size()], seps[i % seps.size()], ctx.cfg.tol);
  });
  ctx.csv = sample_header;
  std::vector<std::pair<double, double>> sup;
  for (std::size_t a = 0; a < ts.size(); ++a) {
    double m = 0.0;
    for (std::size_t b = 0; b < seps.size(); ++b) {
      const QuadResult& q = vals[a * seps.size() + b];
      ctx.csv += sample_row(ts[a], Geometry{seps[b], 0.0, 1.0}, q.value, "none", q.error);
      m = std::max(m, std::abs(q.value));
    }
    sup.emplace_back(ts[a], m);
  }
  ctx.add_fit("sup_abs", sup);
}

std::vector<Geometry> geometry_set(const ExperimentConfig& c) {
  if (c.geometry_set == "default") return default_geometry_grid();
  std::mt19937_64 rng(c.seed);
  // explicit transforms keep the draws identical across standard libraries
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Geometry> out;
  for (int k = 0; k < c.geometry_count; ++k) {
    Geometry g;
    g.r = c.geometry_r_max * unit();
    g.r_prime = c.geometry_r_max * unit();
    g.cos_gamma = 2.0 * unit() - 1.0;
    out.push_back(g);
  }
  return out;
}

void run_perturbed_decay(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Potential pot = make_potential(cfg);
  const RadialGrid grid = make_grid(cfg, pot);
  PropagatorOptions opt;
  opt.ell_max = cfg.ell_max;
  opt.eta_end = cfg.eta_end;
  opt.tol = cfg.tol;
  opt.classify_tol = cfg.classify_tol;
  opt.f_window = cfg.f_window == "full" ? FWindow::full : FWindow::cutoff;
  const Propagator prop(pot, grid, geometry_set(cfg), opt);
  const Verdict v = prop.classification().verdict;
  ctx.verdict = to_string(v);
  const auto ts = window(cfg);
  Correction which = Correction::none;
  if (cfg.subtract == "auto" && !pot.is_zero()) {
    if (v == Verdict::resonance) which = Correction::F;
    if (v == Verdict::eigenvalue || v == Verdict::resonance_and_eigenvalue) which = Correction::G;
    if (v == Verdict::indeterminate) throw PreconditionError("perturbed-decay: classification is indeterminate");
  }
  const bool subtracting = which != Correction::none && ts.front() > 1.0;
  if (which != Correction::none && !subtracting)
    throw ConfigError("perturbed-decay: subtraction needs every t above 1");

  ctx.csv = sample_header;
  std::vector<std::pair<double, double>> raw, sub, corr;
  double worst_err = 0.0;
  for (double t : ts) {
    const auto samples = prop.evolution(t, false);
    double m = 0.0;
    for (const auto& s : samples) {
      ctx.csv += sample_row(t, s.geometry, s.value, "none", s.est_error);
      m = std::max(m, std::abs(s.value));
      worst_err = std::max(worst_err, s.est_error);
    }
    raw.emplace_back(t, m);
    if (!subtracting) continue;
    const auto c = which == Correction::F ? prop.F(t) : prop.G(t);
    double ms = 0.0, mc = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const cplx value = samples[k].value - c[k];
      ctx.csv += sample_row(t, samples[k].geometry, value, to_string(which), samples[k].est_error);
      ms = std::max(ms, std::abs(value));
      mc = std::max(mc, std::abs(c[k]));
    }
    sub.emplace_back(t, ms);
    corr.emplace_back(t, mc);
  }
  ctx.add_fit("raw", raw);
  if (subtracting) {
    ctx.add_fit("subtracted", sub);
    ctx.add_fit("correction", corr);
  }
  ctx.results["correction"] = to_string(which);
  ctx.results["f_window"] = cfg.f_window;
  ctx.results["table_check_error"] = prop.table_check_error();
  ctx.results["max_est_error"] = worst_err;
  ctx.results["geometries"] = static_cast<int>(prop.geometries().size());
}

void run_resolvent_bounds(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Potential pot = make_potential(cfg);
  const RadialGrid grid = make_grid(cfg, pot);
  const Sign sign = parse_sign(cfg.sign);
  std::vector<std::pair<double, double>> samples;
  ctx.csv = "x,eta,lambda,norm\n";
  for (double x : window(cfg)) {
    const double eta = cfg.window_variable == "lambda" ? eta_of_lambda(x) : x;
    const double n = weighted_norm(sign, eta, pot, grid, cfg.ell_max, cfg.s, cfg.s_prime, cfg.derivative);
    ctx.csv += csv_number(x) + "," + csv_number(eta) + "," + csv_number(lambda_of_eta(eta)) + "," + csv_number(n) + "\n";
    samples.emplace_back(x, n);
  }
  ctx.add_fit("norm", samples);
  ctx.results["variable"] = cfg.window_variable;
  ctx.results["derivative"] = cfg.derivative;
}

void run_expansion_check(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Sign sign = parse_sign(cfg.sign);
  if (cfg.expansion_kind == "free") {
    std::vector<std::pair<double, double>> rem;
    ctx.csv = "eta,remainder\n";
    for (double eta : window(cfg)) {
      const double e =
          std::abs(free_resolvent(sign, eta, cfg.expansion_r) - expansion_partial_sum(sign, eta, cfg.expansion_r, 4));
      ctx.csv += csv_number(eta) + "," + csv_number(e) + "\n";
      rem.emplace_back(eta, e);
    }
    ctx.add_fit("remainder", rem);
    return;
  }
  const Potential pot = make_potential(cfg);
  const RadialGrid grid = make_grid(cfg, pot);
  const Classification c = classify(pot, grid, cfg.ell_max, cfg.classify_tol);
  ctx.verdict = to_string(c.verdict);
  const ExpansionCoefficients co = leading_coefficients(c, pot, grid);
  auto pick = [&](int l, const std::string& name) -> Eigen::MatrixXcd {
    const Eigen::MatrixXcd& m = co.block(l, name);
    return sign == Sign::plus ? m : Eigen::MatrixXcd(m.conjugate());
  };
  std::vector<std::pair<double, double>> main, m0, m0d;
  ctx.csv = "eta,quantity,value\n";
  const bool regular = c.verdict == Verdict::regular;
  for (double eta : window(cfg)) {
    const auto ms = build_M_all(sign, eta, pot, grid, cfg.ell_max);
    double value = 0.0, r0 = 0.0, r0d = 0.0;
    bool has_m0 = false;
    for (int l = 0; l <= cfg.ell_max; ++l) {
      const Eigen::MatrixXcd inv = ms[l].matrix.fullPivLu().inverse();
      if (regular) {
        value = std::max(value, op_norm(inv - pick(l, "T0_inv") - eta * pick(l, "first_order_plus")));
      } else {
        value = std::max(value, op_norm(inv));
        if (co.has(l, "M_0_plus")) {
          const Eigen::MatrixXcd lead = inv - pick(l, "M_minus1_plus") / eta;
          r0 = std::max(r0, op_norm(lead - pick(l, "M_0_plus")));
          r0d = std::max(r0d, op_norm(lead - pick(l, "M_0_display")));
          has_m0 = true;
        }
      }
    }
    const std::string q = regular ? "remainder" : "inverse_norm";
    ctx.csv += csv_number(eta) + "," + q + "," + csv_number(value) + "\n";
    main.emplace_back(eta, value);
    if (has_m0) {
      ctx.csv += csv_number(eta) + ",M0_remainder," + csv_number(r0) + "\n";
      ctx.csv += csv_number(eta) + ",M0_display_remainder," + csv_number(r0d) + "\n";
      m0.emplace_back(eta, r0);
      m0d.emplace_back(eta, r0d);
    }
  }
  ctx.add_fit(regular ? "remainder" : "inverse_norm", main);
  if (!m0.empty()) {
    ctx.add_fit("M0_remainder", m0);
    ctx.add_fit("M0_display_remainder", m0d);
    ctx.results["rho"] = co.rho;
  }
  ctx.results["surrogate"] = co.surrogate;
  if (co.surrogate) {
    ctx.results["surrogate_fit_residual"] = co.fit_residual;
    ctx.results["surrogate_fit_envelope"] = co.fit_envelope;
  }
}

void run_resonance_tune(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Potential base = make_potential(cfg, cfg.tune_lo);
  const RadialGrid grid = make_grid(cfg, base);
  auto family = [&](double c) { return make_potential(cfg, c); };
  const TuneResult r = resonance_tune(family, cfg.tune_ell, cfg.tune_lo, cfg.tune_hi, grid);
  const Potential pot = family(r.coupling);
  const Classification c = classify(pot, grid, cfg.ell_max, cfg.classify_tol);
  ctx.verdict = to_string(c.verdict);
  ctx.results["critical_coupling"] = r.coupling;
  ctx.results["t0_eigenvalue"] = r.eigenvalue;
  ctx.results["sigma_max"] = r.sigma_max;
  ctx.results["iterations"] = r.iterations;
  ctx.results["classification"] = json::parse(classification_report(c, pot, grid));
}

std::string timestamp(std::chrono::system_clock::time_point tp) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Potential make_potential(const ExperimentConfig& c) { return make_potential(c, c.coupling); }

Potential make_potential(const ExperimentConfig& c, double coupling) {
  Potential p = Potential::from_name(c.profile, coupling, c.parameter);
  if (c.beta > 0.0) p.beta = c.beta;
  return p;
}

RadialGrid make_grid(const ExperimentConfig& c, const Potential& pot) {
  double r_max = c.grid_r_max;
  if (!(r_max > 0.0)) {
    if (pot.is_zero())
      r_max = 10.0;
    else if (pot.name == "gaussian" || pot.name == "exponential")
      r_max = pot.support_radius();
    else
      r_max = default_r_max(pot.beta);
  }
  return build_grid(c.grid_count, r_max, pot.beta);
}

RunOutcome run(const ExperimentConfig& cfg, bool write_files) {
  validate_config(cfg);
  const auto started = std::chrono::system_clock::now();
  const auto t0 = std::chrono::steady_clock::now();
  Context ctx(cfg);
  if (cfg.experiment == "classify") run_classify(ctx);
  if (cfg.experiment == "free-decay") run_free_decay(ctx);
  if (cfg.experiment == "perturbed-decay") run_perturbed_decay(ctx);
  if (cfg.experiment == "resolvent-bounds") run_resolvent_bounds(ctx);
  if (cfg.experiment == "expansion-check") run_expansion_check(ctx);
  if (cfg.experiment == "resonance-tune") run_resonance_tune(ctx);

  RunOutcome out;
  json assertions = json::array();
  for (const auto& [name, a] : cfg.fit_assertions) {
    json j;
    j["name"] = "exponent:" + name;
    auto it = ctx.fits.find(name);
    if (it == ctx.fits.end()) {
      j["pass"] = false;
      j["detail"] = "fit '" + name + "' was not produced";
    } else {
      const DecayFit& f = it->second;
      const bool ok = std::abs(f.exponent - a.center) <= a.band;
      j["pass"] = ok;
      j["detail"] = "exponent " + csv_number(f.exponent) + " vs " + csv_number(a.center) + " +- " +
                    csv_number(a.band) + ", residual " + csv_number(f.residual);
    }
    out.pass = out.pass && j["pass"].get<bool>();
    assertions.push_back(j);
  }
  if (!cfg.expect_verdict.empty()) {
    json j;
    j["name"] = "verdict";
    const bool ok = ctx.verdict == cfg.expect_verdict;
    j["pass"] = ok;
    j["detail"] = "got '" + ctx.verdict + "', expected '" + cfg.expect_verdict + "'";
    out.pass = out.pass && ok;
    assertions.push_back(j);
  }

  json report;
  report["experiment"] = cfg.experiment;
  report["schema"] = "quartic.report";
  report["schema_version"] = 1;
  json echo = json::object();
  {
    std::istringstream lines(serialize_config(cfg));
    std::string line;
    while (std::getline(lines, line)) {
      const auto eq = line.find(" = ");
      echo[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  report["config_echo"] = echo;
  if (!ctx.verdict.empty()) report["verdict"] = ctx.verdict;
  json fits = json::array();
  for (const auto& name : ctx.fit_order) fits.push_back(fit_json(name, ctx.fits.at(name)));
  report["fits"] = fits;
  report["results"] = ctx.results;
  report["assertions"] = assertions;
  report["pass"] = out.pass;
  report["versions"] = {{"artifact", artifact_version},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"report_schema", 1}};
  out.report = report.dump(2) + "\n";
  out.csv = ctx.csv;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json side;
  side["started"] = timestamp(started);
  side["finished"] = timestamp(std::chrono::system_clock::now());
  side["wall_seconds"] = wall;
  side["threads"] = thread_count();
  out.sidecar = side.dump(2) + "\n";

  if (write_files) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const std::string stem = cfg.output_stem.empty() ? cfg.experiment : cfg.output_stem;
    auto put = [&](const std::string& name, const std::string& body) {
      const fs::path p = dir / name;
      std::ofstream f(p, std::ios::binary);
      if (!f) throw ConfigError("cannot write '" + p.string() + "'");
      f << body;
      out.files.push_back(p.string());
    };
    put(stem + ".json", out.report);
    if (!out.csv.empty()) put(stem + ".csv", out.csv);
    put(stem + ".meta.json", out.sidecar);
  }
  return out;
}

}  // namespace quartic
