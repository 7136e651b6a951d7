#include "quartic/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "quartic/errors.hpp"
#include "quartic/quadrature.hpp"
#include "quartic/spectral_map.hpp"

namespace quartic {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int panel_order = 15;

double u_of(double eta) {
  const double e2 = eta * eta;
  return e2 * e2 + e2;
}
double du_of(double eta) { return 4.0 * eta * eta * eta + 2.0 * eta; }

// Binary-counter pairwise summation: the tree shape depends only on the number
// of leaves, so the rounding is fixed by the panel sequence.
class PairwiseSum {
 public:
  explicit PairwiseSum(int dim) : dim_(dim) {}
  void add(std::vector<cplx> v) {
    int level = 0;
    while (!stack_.empty() && stack_.back().first == level) {
      auto& top = stack_.back().second;
      for (int k = 0; k < dim_; ++k) v[k] = top[k] + v[k];
      stack_.pop_back();
      ++level;
    }
    stack_.emplace_back(level, std::move(v));
  }
  std::vector<cplx> total() const {
    std::vector<cplx> s(dim_, cplx(0.0));
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
      for (int k = 0; k < dim_; ++k) s[k] = it->second[k] + s[k];
    return s;
  }

 private:
  int dim_;
  std::vector<std::pair<int, std::vector<cplx>>> stack_;
};

struct Engine {
  const BatchAmplitude& f;
  int dim;
  double t;
  bool jacobian;
  std::vector<cplx> buf;

  Engine(const BatchAmplitude& f, int dim, double t, bool jac)
      : f(f), dim(dim), t(t), jacobian(jac), buf(dim) {}

  void panel(double el, double er, std::vector<cplx>& out) {
    const GaussRule& g = gauss_legendre(panel_order);
    const double mid = 0.5 * (el + er), half = 0.5 * (er - el);
    std::fill(out.begin(), out.end(), cplx(0.0));
    for (int k = 0; k < panel_order; ++k) {
      const double eta = mid + half * g.x[k];
      const double ph = -t * u_of(eta);
      double w = g.w[k] * half;
      if (jacobian) w *= du_of(eta);
      const cplx e = cplx(std::cos(ph), std::sin(ph)) * w;
      f(eta, buf.data());
      for (int j = 0; j < dim; ++j) out[j] += e * buf[j];
    }
  }
};

BatchResult run_engine(const BatchAmplitude& f, int dim, const IntegrationPlan& plan, bool jacobian) {
  const double t = plan.t, a = plan.a, b = plan.b;
  if (!(t != 0.0) || !std::isfinite(t)) throw DomainError("stone_integral: t must be finite and nonzero");
  if (!(a >= 0.0) || !(b > a) || !std::isfinite(b))
    throw DomainError("stone_integral: need 0 <= a < b < infinity");
  if (!(plan.tol > 0.0)) throw DomainError("stone_integral: tol must be positive");
  if (dim < 1) throw DomainError("stone_integral: dim must be >= 1");

  const double ua = u_of(a), ub = u_of(b);
  const long n0 = std::max(1L, static_cast<long>(std::ceil(std::abs(t) * (ub - ua) / two_pi)));
  if (n0 > plan.max_panels)
    throw ConvergenceError("stone_integral: interval needs " + std::to_string(n0) +
                               " periods, above max_panels",
                           cplx(0.0), INFINITY);
  const double du = (ub - ua) / n0;
  const double err_per_u = plan.tol / (ub - ua);

  Engine eng(f, dim, t, jacobian);
  PairwiseSum sum(dim);
  long panels = 0;
  double err_total = 0.0, floor_total = 0.0;
  std::vector<cplx> whole(dim), left(dim), right(dim);

  auto eta_at = [&](double u) { return eta_of_lambda(std::max(0.0, u)); };

  // explicit stack keeps leaves in ascending order
  struct Job {
    double ul, ur;
    int depth;
  };
  std::vector<Job> stack;
  for (long p = 0; p < n0; ++p) {
    const double ul = ua + du * p;
    const double ur = p + 1 == n0 ? ub : ua + du * (p + 1);
    stack.push_back({ul, ur, 0});
    while (!stack.empty()) {
      Job job = stack.back();
      stack.pop_back();
      const double el = job.ul == ua ? a : eta_at(job.ul);
      const double er = job.ur == ub ? b : eta_at(job.ur);
      const double um = 0.5 * (job.ul + job.ur);
      const double em = eta_at(um);
      eng.panel(el, er, whole);
      eng.panel(el, em, left);
      eng.panel(em, er, right);
      double err = 0.0, mag = 0.0;
      for (int j = 0; j < dim; ++j) {
        const cplx fine = left[j] + right[j];
        err = std::max(err, std::abs(fine - whole[j]));
        mag = std::max(mag, std::abs(left[j]) + std::abs(right[j]));
      }
      // rounding floor: summation plus the phase error t u(eta) eps carried by each node
      const double noise = 64.0 * 2.2e-16 * mag * (1.0 + std::abs(t) * u_of(er));
      const double allowed = std::max(err_per_u * (job.ur - job.ul), noise);
      if (err > allowed && job.depth < 40) {
        stack.push_back({um, job.ur, job.depth + 1});
        stack.push_back({job.ul, um, job.depth + 1});
        continue;
      }
      std::vector<cplx> leaf(dim);
      for (int j = 0; j < dim; ++j) leaf[j] = left[j] + right[j];
      sum.add(std::move(leaf));
      err_total += err;
      floor_total += noise;
      if (++panels > plan.max_panels) {
        throw ConvergenceError("stone_integral: tolerance not reached within max_panels",
                               sum.total()[0], err_total);
      }
    }
  }
  BatchResult res;
  res.value = sum.total();
  res.error = err_total;
  res.panels = panels;
  double biggest = 0.0;
  for (auto& v : res.value) biggest = std::max(biggest, std::abs(v));
  if (err_total > plan.tol * (1.0 + biggest) && err_total > floor_total)
    throw ConvergenceError("stone_integral: estimated error above tolerance", res.value[0], err_total);
  return res;
}

}  // namespace

SplitPoints split_points(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("split_points: t must be positive");
  SplitPoints sp;
  if (t <= 1.0) {
    sp.low_cut = std::pow(t, -0.25);
    sp.regime = SplitPoints::Regime::small_time;
  } else {
    sp.low_cut = 1.0 / std::sqrt(t);
    sp.regime = SplitPoints::Regime::large_time;
  }
  return sp;
}

BatchResult stone_integral(const BatchAmplitude& f, int dim, const IntegrationPlan& plan) {
  return run_engine(f, dim, plan, true);
}

QuadResult stone_integral(const Amplitude& f, const IntegrationPlan& plan) {
  BatchAmplitude g = [&](double eta, cplx* out) { out[0] = f(eta); };
  BatchResult r = run_engine(g, 1, plan, true);
  return {r.value[0], r.error, r.panels};
}

BatchResult oscillatory_integral(const BatchAmplitude& g, int dim, const IntegrationPlan& plan) {
  return run_engine(g, dim, plan, false);
}

double tail_remainder_integral(const TailEnvelope& env, double eta) {
  // s = eta / x maps (0, 1] onto [eta, inf)
  const GaussRule& g = gauss_legendre(200);
  double acc = 0.0;
  for (std::size_t k = 0; k < g.x.size(); ++k) {
    const double x = 0.5 * (g.x[k] + 1.0);
    const double s = eta / x;
    const double q = env.frequency + env.decay / s;
    const double base = env.amplitude * std::pow(s, -env.decay);
    const double up = du_of(s), upp = 12.0 * s * s + 2.0;
    const double integrand = base * q * q / up + base * q * upp / (up * up);
    acc += 0.5 * g.w[k] * integrand * eta / (x * x);
  }
  return acc * 1.05;  // margin for the 200-point rule
}

double plain_tail_bound(const TailEnvelope& env, double eta) {
  const double p = env.decay;
  if (p <= 4.0) return INFINITY;
  return env.amplitude * (4.0 * std::pow(eta, 4.0 - p) / (p - 4.0) + 2.0 * std::pow(eta, 2.0 - p) / (p - 2.0));
}

cplx ibp_boundary_terms(cplx f, cplx f_prime, double t, double eta) {
  const cplx it(0.0, t);
  const cplx ph = std::exp(cplx(0.0, -t * u_of(eta)));
  return ph * (f / it + f_prime / du_of(eta) / (it * it));
}

TailResult improper_tail(const BatchAmplitude& f, int dim, double t, double a, const TailEnvelope& env,
                         double tol, long max_panels, double eta_cap) {
  if (!(t != 0.0) || !std::isfinite(t)) throw DomainError("improper_tail: t must be finite and nonzero");
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("improper_tail: a must be finite and >= 0");
  if (!(env.amplitude >= 0.0) || !(env.decay >= 1.0))
    throw DomainError("improper_tail: envelope must decay at least like 1/eta");

  const double t2 = t * t;
  double eta_max = std::max({2.0 * a, a + 1.0, 1.0});
  auto bound_at = [&](double e, bool& ibp) {
    const double b_ibp = tail_remainder_integral(env, e) / t2;
    const double b_plain = plain_tail_bound(env, e);
    ibp = b_ibp <= b_plain;
    return std::min(b_ibp, b_plain);
  };
  bool use_ibp = true;
  double bound = bound_at(eta_max, use_ibp);
  while (bound > 0.5 * tol) {
    eta_max *= 2.0;
    if (eta_max > eta_cap)
      throw TruncationError("improper_tail: envelope cannot certify tol below eta_cap", bound);
    bound = bound_at(eta_max, use_ibp);
  }

  IntegrationPlan plan{t, a, eta_max, 0.5 * tol, max_panels};
  BatchResult body = stone_integral(f, dim, plan);

  TailResult res;
  res.value = body.value;
  res.quadrature_error = body.error;
  res.truncation_bound = bound;
  res.eta_max = eta_max;
  res.panels = body.panels;
  if (use_ibp) {
    // e^{-itU} [ g(U) / (it) + g'(U) / (it)^2 ],  g(u) = f(eta(u)), g' = f' / u'
    std::vector<cplx> f0(dim), fp(dim), fm(dim);
    const double h = 1e-4 * std::max(1.0, eta_max);
    f(eta_max, f0.data());
    f(eta_max + h, fp.data());
    f(eta_max - h, fm.data());
    for (int j = 0; j < dim; ++j)
      res.value[j] += ibp_boundary_terms(f0[j], (fp[j] - fm[j]) / (2.0 * h), t, eta_max);
  }
  return res;
}

TailResult improper_tail(const Amplitude& f, double t, double a, const TailEnvelope& env, double tol,
                         long max_panels, double eta_cap) {
  BatchAmplitude g = [&](double eta, cplx* out) { out[0] = f(eta); };
  return improper_tail(g, 1, t, a, env, tol, max_panels, eta_cap);
}

QuadResult ray_tail(const std::function<cplx(cplx)>& f, double t, double a, double growth, double tol,
                    double theta) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("ray_tail: t must be positive");
  if (!(theta > 0.0) || theta > std::numbers::pi / 8 + 1e-15)
    throw DomainError("ray_tail: theta must lie in (0, pi/8]");
  if (!(t * du_of(a) > growth))
    throw DomainError("ray_tail: start point does not dominate the amplitude growth");
  const cplx dir = std::polar(1.0, -theta);
  auto integrand = [&](double s) {
    const cplx eta = a + s * dir;
    const cplx eta2 = eta * eta;
    const cplx u = eta2 * eta2 + eta2;
    const cplx du = 4.0 * eta2 * eta + 2.0 * eta;
    return std::exp(cplx(0.0, -t) * u) * f(eta) * du * dir;
  };
  const GaussRule& g = gauss_legendre(20);
  auto panel = [&](double s0, double s1) {
    cplx acc = 0.0;
    const double mid = 0.5 * (s0 + s1), half = 0.5 * (s1 - s0);
    for (std::size_t k = 0; k < g.x.size(); ++k) acc += g.w[k] * integrand(mid + half * g.x[k]);
    return acc * half;
  };

  PairwiseSum sum(1);
  double err_total = 0.0;
  long panels = 0;
  double s = 0.0;
  for (;;) {
    // step ~ one unit of the local rate of the exponent (slope or curvature)
    const double m = std::abs(a + s * dir);
    const double rate = t * du_of(m) + std::sqrt(t * (12.0 * m * m + 2.0)) + growth + 1e-300;
    double step = std::min(1.0 / rate, 0.25 * (a + s + 1.0));
    cplx whole, fine;
    for (int halvings = 0;; ++halvings) {
      whole = panel(s, s + step);
      fine = panel(s, s + 0.5 * step) + panel(s + 0.5 * step, s + step);
      if (std::abs(fine - whole) <= std::max(1e-2 * tol, 64.0 * 2.2e-16 * std::abs(fine)) || halvings >= 30)
        break;
      step *= 0.5;
    }
    err_total += std::abs(fine - whole);
    sum.add({fine});
    s += step;
    if (++panels > 200000) throw ConvergenceError("ray_tail: no decay along the ray", sum.total()[0], err_total);
    // log of |e^{-itu}| times the admitted amplitude growth; e^{-50} is far below any tol
    const cplx eta = a + s * dir;
    const cplx eta2 = eta * eta;
    const double log_mag = t * std::imag(eta2 * eta2 + eta2) + growth * s * std::sin(theta);
    if (log_mag < -50.0 && std::abs(integrand(s)) * step < 1e-3 * tol) break;
  }
  return {sum.total()[0], err_total, panels};
}

DecayFit van_der_corput_probe(const std::function<double(double)>& g, const std::vector<double>& t_grid,
                              double support_end, double tol) {
  BatchAmplitude amp = [&](double eta, cplx* out) { out[0] = g(eta); };
  std::vector<std::pair<double, double>> samples;
  bool all_zero = true;
  for (double t : t_grid) {
    IntegrationPlan plan{t, 0.0, support_end, tol, 1L << 24};
    const BatchResult r = oscillatory_integral(amp, 1, plan);
    const double m = std::abs(r.value[0]);
    if (m != 0.0) all_zero = false;
    samples.emplace_back(t, m);
  }
  if (all_zero) throw FitError("van_der_corput_probe: every sample vanishes, nothing to fit");
  for (auto& [t, m] : samples)
    if (!(m > 0.0)) throw FitError("van_der_corput_probe: zero sample at t = " + std::to_string(t));
  DecayFit fit = fit_decay(samples);
  if (!fit.reliable())
    throw FitError("van_der_corput_probe: fit residual " + std::to_string(fit.residual) + " above 0.5");
  return fit;
}

}  // namespace quartic
