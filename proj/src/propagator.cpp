#include "quartic/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "quartic/errors.hpp"
#include "quartic/parallel.hpp"
#include "quartic/quadrature.hpp"
#include "quartic/spectral_map.hpp"

namespace quartic {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double max_condition = 1e12;

double u_of(double eta) {
  const double e2 = eta * eta;
  return e2 * e2 + e2;
}
double du_of(double eta) { return 4.0 * eta * eta * eta + 2.0 * eta; }

void check_geometry(const Geometry& g) {
  if (!(g.r >= 0.0) || !(g.r_prime >= 0.0) || !std::isfinite(g.r) || !std::isfinite(g.r_prime))
    throw DomainError("geometry: radii must be finite and >= 0");
  if (!(std::abs(g.cos_gamma) <= 1.0)) throw DomainError("geometry: |cos gamma| must be <= 1");
}

// (2l + 1) / (4 pi) P_l(cos gamma), l = 0..lmax
std::vector<double> angular_factors(int lmax, double cos_gamma) {
  std::vector<double> p(lmax + 1);
  legendre_values(lmax, cos_gamma, p.data());
  for (int l = 0; l <= lmax; ++l) p[l] *= (2.0 * l + 1.0) / (4.0 * pi);
  return p;
}

Eigen::PartialPivLU<Eigen::MatrixXcd> checked_lu(const Eigen::MatrixXcd& m, int ell) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
  const double rc = lu.rcond();
  if (!(rc * max_condition >= 1.0))
    throw SingularityError("M is near-singular in sector l=" + std::to_string(ell),
                           "sector l=" + std::to_string(ell), rc > 0.0 ? 1.0 / rc : INFINITY);
  return lu;
}

// Distinct radii of a geometry list and the index pair of each geometry.
struct RadiusIndex {
  std::vector<double> radii;
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::vector<double>> angular;

  RadiusIndex(const std::vector<Geometry>& geoms, int lmax) {
    std::map<double, int> seen;
    auto index = [&](double r) {
      auto it = seen.find(r);
      if (it != seen.end()) return it->second;
      const int k = static_cast<int>(radii.size());
      radii.push_back(r);
      seen.emplace(r, k);
      return k;
    };
    for (const Geometry& g : geoms) {
      check_geometry(g);
      const int a = index(g.r);
      const int b = index(g.r_prime);
      pairs.emplace_back(a, b);
      angular.push_back(angular_factors(lmax, g.cos_gamma));
    }
  }
};

// Chebyshev points of the first kind on [-1, 1] with barycentric weights.
struct ChebyshevRule {
  std::vector<double> x, w;
  explicit ChebyshevRule(int n) : x(n), w(n) {
    for (int k = 0; k < n; ++k) {
      const double th = (2.0 * k + 1.0) * pi / (2.0 * n);
      x[k] = -std::cos(th);
      w[k] = (k % 2 == 0 ? 1.0 : -1.0) * std::sin(th);
    }
  }
};

}  // namespace

double Geometry::separation() const {
  return std::sqrt(std::max(0.0, r * r + r_prime * r_prime - 2.0 * r * r_prime * cos_gamma));
}

std::vector<Geometry> default_geometry_grid() {
  const double radii[] = {0.0, 0.5, 1.0, 2.0};
  std::vector<Geometry> out;
  for (double r : {0.5, 1.0, 2.0}) out.push_back({0.0, r, 1.0});
  out.push_back({0.0, 0.0, 1.0});
  for (int i = 1; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      for (double c : {1.0, -1.0}) out.push_back({radii[i], radii[j], c});
  return out;
}

std::string to_string(Correction c) {
  switch (c) {
    case Correction::none: return "none";
    case Correction::F: return "F";
    case Correction::G: return "G";
  }
  return "none";
}

QuadResult free_kernel(double t, double separation, double tol) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("free_kernel: t must be positive");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw DomainError("free_kernel: separation must be finite and >= 0");
  const double r = separation;
  // real-axis part up to eta_c with t u'(eta_c) = 2 r + 1, past the stationary point
  const double target = (2.0 * r + 1.0) / t;
  double lo = 0.0, hi = 1.0;
  while (du_of(hi) < target) hi *= 2.0;
  for (int k = 0; k < 200 && hi - lo > 1e-14 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    (du_of(mid) < target ? lo : hi) = mid;
  }
  const double eta_c = std::max(hi, 1e-3);
  // (1 / 2 pi i) (R0+ - R0-) = sin(eta r) / (4 pi^2 r (1 + 2 eta^2))
  auto f = [r](double eta) {
    const double s = r == 0.0 ? eta : std::sin(eta * r) / r;
    return cplx(s / (4.0 * pi * pi * (1.0 + 2.0 * eta * eta)), 0.0);
  };
  auto fc = [r](cplx eta) {
    const cplx s = r == 0.0 ? eta : std::sin(eta * r) / r;
    return s / (4.0 * pi * pi * (1.0 + 2.0 * eta * eta));
  };
  const QuadResult body = stone_integral(f, IntegrationPlan{t, 0.0, eta_c, 0.5 * tol, 1L << 24});
  const QuadResult tail = ray_tail(fc, t, eta_c, r, 0.5 * tol);
  return {body.value + tail.value, body.error + tail.error, body.panels + tail.panels};
}

ResolventValue perturbed_resolvent(Sign sign, double eta, const Geometry& g, const Potential& pot,
                                   const RadialGrid& grid, int ell_max, double truncation_tol) {
  check_geometry(g);
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("perturbed_resolvent: eta must be finite and >= 0");
  if (ell_max < 0) throw DomainError("perturbed_resolvent: ell_max must be >= 0");
  ResolventValue out;
  out.value = free_resolvent(sign, eta, g.separation());
  if (pot.is_zero()) return out;

  const DiscretePotential d = discretize(pot, grid);
  const auto ms = build_M_all(sign, eta, pot, grid, ell_max);
  const SeparationKernel k = resolvent_kernel(sign, eta);
  const Eigen::MatrixXcd a = d.v.asDiagonal() * sector_vectors(k, ell_max, grid, g.r, eta);
  const Eigen::MatrixXcd b = d.v.asDiagonal() * sector_vectors(k, ell_max, grid, g.r_prime, eta);
  const std::vector<double> ang = angular_factors(ell_max, g.cos_gamma);
  cplx sum = 0.0, last = 0.0;
  for (int l = 0; l <= ell_max; ++l) {
    const auto lu = checked_lu(ms[l].matrix, l);
    last = ang[l] * a.col(l).cwiseProduct(lu.solve(b.col(l))).sum();
    sum += last;
  }
  out.value -= sum;
  if (ell_max > 0) {
    out.truncation_estimate = std::abs(last) / std::max(std::abs(sum), 1e-300);
    out.truncation_warning = out.truncation_estimate > truncation_tol && std::abs(sum) > 1e-14 * std::abs(out.value);
  }
  return out;
}

namespace {

// Sector matrices of R_V^{sign}(eta) in coefficient space.
std::vector<Eigen::MatrixXcd> rv_sectors(Sign sign, double eta, const Potential& pot, const RadialGrid& grid,
                                         int ell_max) {
  auto ops = build_sector_operators(resolvent_kernel(sign, eta), ell_max, grid, eta);
  std::vector<Eigen::MatrixXcd> out;
  if (pot.is_zero()) {
    for (auto& op : ops) out.push_back(std::move(op.matrix));
    return out;
  }
  const DiscretePotential d = discretize(pot, grid);
  for (int l = 0; l <= ell_max; ++l) {
    const Eigen::MatrixXcd& A = ops[l].matrix;
    Eigen::MatrixXcd M = d.v.asDiagonal() * A * d.v.asDiagonal();
    M.diagonal() += d.U.cast<cplx>();
    const auto lu = checked_lu(M, l);
    const Eigen::MatrixXcd VA = d.v.asDiagonal() * A;
    out.push_back(A - VA.transpose() * lu.solve(VA));
  }
  return out;
}

}  // namespace

double weighted_norm(Sign sign, double eta, const Potential& pot, const RadialGrid& grid, int ell_max, double s,
                     double s_prime, int derivative) {
  if (!(s > 0.5) || !(s_prime > 0.5)) throw DomainError("weighted_norm: weights need s, s' > 1/2");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("weighted_norm: eta must be positive");
  if (derivative != 0 && derivative != 1) throw DomainError("weighted_norm: derivative must be 0 or 1");
  const int n = grid.count();
  Eigen::VectorXd wl(n), wr(n);
  for (int i = 0; i < n; ++i) {
    wl(i) = std::pow(1.0 + grid.nodes[i], -s_prime);
    wr(i) = std::pow(1.0 + grid.nodes[i], -s);
  }
  std::vector<Eigen::MatrixXcd> R;
  if (derivative == 0) {
    R = rv_sectors(sign, eta, pot, grid, ell_max);
  } else {
    const double lam = lambda_of_eta(eta);
    const double h = 1e-3 * lam;
    const auto up = rv_sectors(sign, eta_of_lambda(lam + h), pot, grid, ell_max);
    const auto dn = rv_sectors(sign, eta_of_lambda(lam - h), pot, grid, ell_max);
    for (int l = 0; l <= ell_max; ++l) R.push_back((up[l] - dn[l]) / (2.0 * h));
  }
  double best = 0.0;
  for (const auto& m : R) {
    const Eigen::MatrixXcd w = wl.asDiagonal() * m * wr.asDiagonal();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(w);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

struct Propagator::Impl {
  Potential pot;
  RadialGrid grid;
  std::vector<Geometry> geoms;
  PropagatorOptions opt;
  DiscretePotential d;
  Classification cls;
  ExpansionCoefficients coeffs;
  RadiusIndex index;
  int n_geom = 0;
  int L = 0;
  bool zero = false;
  bool has_f = false, has_g = false;
  double frequency = 0.0;  // bound on the oscillation rate of the tabulated amplitudes

  // table: per panel, nodes x ncomp values; components q | Re S_F | Im W_G / eta
  ChebyshevRule cheb;
  int n_panels = 0;
  int ncomp = 0;
  std::vector<std::vector<double>> table;
  double check_error = 0.0;
  double q_scale = 0.0;

  Impl(Potential p, RadialGrid g, std::vector<Geometry> gs, PropagatorOptions o)
      : pot(std::move(p)),
        grid(std::move(g)),
        geoms(std::move(gs)),
        opt(o),
        index(geoms, o.ell_max),
        cheb(o.panel_nodes) {
    if (geoms.empty()) throw DomainError("Propagator: geometry list is empty");
    if (opt.ell_max < 0) throw DomainError("Propagator: ell_max must be >= 0");
    if (!(opt.eta_end > 0.0) || !(opt.panel_width > 0.0) || opt.panel_nodes < 4)
      throw DomainError("Propagator: bad tabulation options");
    n_geom = static_cast<int>(geoms.size());
    L = opt.ell_max;
    zero = pot.is_zero();
    d = discretize(pot, grid);
    cls = classify(pot, grid, L, opt.classify_tol);
    if (zero) return;
    if (cls.verdict != Verdict::regular) {
      coeffs = leading_coefficients(cls, pot, grid);
      for (auto& [l, blk] : coeffs.blocks) {
        if (blk.count("S1_T1inv_S1")) has_f = true;
        if (blk.count("A_minus2")) has_g = true;
      }
    }
    double rmax = 0.0;
    for (double r : index.radii) rmax = std::max(rmax, r);
    frequency = 2.0 * rmax + 2.0 * std::min(pot.support_radius(), grid.r_max);
    build_table();
  }

  // diag(v) a_l(rho) for every radius, per sector: (L + 1) matrices n x radii
  std::vector<Eigen::MatrixXcd> weighted_vectors(double eta, const RadiusIndex& idx) const {
    const int n = grid.count();
    const int m = static_cast<int>(idx.radii.size());
    std::vector<Eigen::MatrixXcd> B(L + 1, Eigen::MatrixXcd(n, m));
    const SeparationKernel k = resolvent_kernel(Sign::plus, eta);
    for (int j = 0; j < m; ++j) {
      const Eigen::MatrixXcd a = d.v.asDiagonal() * sector_vectors(k, L, grid, idx.radii[j], eta);
      for (int l = 0; l <= L; ++l) B[l].col(j) = a.col(l);
    }
    return B;
  }

  // sum_l ang_l B_l(r)^T X_l B_l(r') over sectors carrying `block`
  std::vector<cplx> block_sandwich(const std::vector<Eigen::MatrixXcd>& B, const RadiusIndex& idx,
                                   const std::string& block) const {
    std::vector<cplx> out(idx.pairs.size(), cplx(0.0));
    for (int l = 0; l <= L; ++l) {
      if (!coeffs.has(l, block)) continue;
      const Eigen::MatrixXcd XB = coeffs.block(l, block) * B[l];
      for (std::size_t g = 0; g < idx.pairs.size(); ++g) {
        const auto [a, b] = idx.pairs[g];
        out[g] += idx.angular[g][l] * B[l].col(a).cwiseProduct(XB.col(b)).sum();
      }
    }
    return out;
  }

  // direct values of every tabulated component at eta > 0
  void sample(double eta, double* out) const {
    const auto B = weighted_vectors(eta, index);
    const auto ms = build_M_all(Sign::plus, eta, pot, grid, L);
    std::vector<cplx> c(n_geom, cplx(0.0));
    for (int l = 0; l <= L; ++l) {
      const auto lu = checked_lu(ms[l].matrix, l);
      const Eigen::MatrixXcd Y = lu.solve(B[l]);
      for (int g = 0; g < n_geom; ++g) {
        const auto [a, b] = index.pairs[g];
        c[g] += index.angular[g][l] * B[l].col(a).cwiseProduct(Y.col(b)).sum();
      }
    }
    int off = 0;
    for (int g = 0; g < n_geom; ++g) out[off + g] = eta * c[g].imag();
    off += n_geom;
    if (has_f) {
      const auto s = block_sandwich(B, index, "S1_T1inv_S1");
      for (int g = 0; g < n_geom; ++g) out[off + g] = s[g].real();
      off += n_geom;
    }
    if (has_g) {
      const auto w = block_sandwich(B, index, "A_minus2");
      for (int g = 0; g < n_geom; ++g) out[off + g] = w[g].imag() / eta;
    }
  }

  double panel_left(int k) const { return k * opt.panel_width; }
  double panel_right(int k) const { return k + 1 == n_panels ? opt.eta_end : (k + 1) * opt.panel_width; }

  void build_table() {
    n_panels = std::max(1, static_cast<int>(std::ceil(opt.eta_end / opt.panel_width - 1e-9)));
    ncomp = n_geom * (1 + (has_f ? 1 : 0) + (has_g ? 1 : 0));
    const int nn = opt.panel_nodes;
    table.assign(n_panels, std::vector<double>(static_cast<std::size_t>(nn) * ncomp));
    for (int k = 0; k < n_panels; ++k) {
      const double l = panel_left(k), r = panel_right(k);
      for (int j = 0; j < nn; ++j) {
        const double eta = 0.5 * (l + r) + 0.5 * (r - l) * cheb.x[j];
        sample(eta, &table[k][static_cast<std::size_t>(j) * ncomp]);
      }
    }
    for (int k = 0; k < n_panels; ++k)
      for (int j = 0; j < nn * ncomp; ++j) q_scale = std::max(q_scale, std::abs(table[k][j]));
    // one check point per panel, off the nodes
    std::vector<double> direct(ncomp), interp(ncomp);
    for (int k = 0; k < n_panels; ++k) {
      const double eta = panel_left(k) + 0.37 * (panel_right(k) - panel_left(k));
      sample(eta, direct.data());
      evaluate(eta, interp.data());
      for (int c = 0; c < ncomp; ++c) check_error = std::max(check_error, std::abs(direct[c] - interp[c]));
    }
  }

  void evaluate(double eta, double* out) const {
    int k = std::clamp(static_cast<int>(eta / opt.panel_width), 0, n_panels - 1);
    const double l = panel_left(k), r = panel_right(k);
    const double x = (2.0 * eta - l - r) / (r - l);
    const int nn = opt.panel_nodes;
    const std::vector<double>& v = table[k];
    for (int j = 0; j < nn; ++j) {
      if (x == cheb.x[j]) {
        std::copy_n(&v[static_cast<std::size_t>(j) * ncomp], ncomp, out);
        return;
      }
    }
    std::fill(out, out + ncomp, 0.0);
    double den = 0.0;
    for (int j = 0; j < nn; ++j) {
      const double c = cheb.w[j] / (x - cheb.x[j]);
      den += c;
      const double* row = &v[static_cast<std::size_t>(j) * ncomp];
      for (int m = 0; m < ncomp; ++m) out[m] += c * row[m];
    }
    for (int m = 0; m < ncomp; ++m) out[m] /= den;
  }

  // int_0^inf e^{-itu} h(eta) d eta for the tabulated component block at
  // `offset`, with h = weight(eta) * table value. Beyond eta_end the two
  // boundary terms of integration by parts are added and the remainder is
  // bounded from an envelope measured on the last half of the table.
  std::vector<cplx> table_integral(double t, int offset, const std::function<double(double)>& weight,
                                   double split, std::vector<double>* errors) const {
    BatchAmplitude amp = [&](double eta, cplx* out) {
      std::vector<double> buf(ncomp);
      evaluate(eta, buf.data());
      const double w = weight(eta);
      for (int g = 0; g < n_geom; ++g) out[g] = w * buf[offset + g];
    };
    const double E = opt.eta_end;
    std::vector<cplx> value(n_geom, cplx(0.0));
    double quad_err = 0.0;
    double a = 0.0;
    for (double b : {std::min(split, E), E}) {
      if (!(b > a)) continue;
      const BatchResult r = oscillatory_integral(amp, n_geom, IntegrationPlan{t, a, b, 0.25 * opt.tol, 1L << 26});
      for (int g = 0; g < n_geom; ++g) value[g] += r.value[g];
      quad_err += r.error;
      a = b;
    }
    // tail in stone form: f = h / u'
    std::vector<double> fE(ncomp), f1(ncomp), f2(ncomp), buf(ncomp);
    const double h = 1e-3 * opt.panel_width;
    evaluate(E, fE.data());
    evaluate(E - h, f1.data());
    evaluate(E - 2.0 * h, f2.data());
    auto stone_f = [&](const std::vector<double>& vals, double eta, int g) {
      return weight(eta) * vals[offset + g] / du_of(eta);
    };
    const int samples = 16;
    std::vector<double> m1(n_geom, 0.0), m2(n_geom, 0.0);
    for (int s = 0; s <= samples; ++s) {
      const double e1 = 0.5 * E + 0.25 * E * s / samples;
      const double e2 = 0.75 * E + 0.25 * E * s / samples;
      evaluate(e1, buf.data());
      for (int g = 0; g < n_geom; ++g) m1[g] = std::max(m1[g], std::abs(stone_f(buf, e1, g)));
      evaluate(e2, buf.data());
      for (int g = 0; g < n_geom; ++g) m2[g] = std::max(m2[g], std::abs(stone_f(buf, e2, g)));
    }
    if (errors) errors->assign(n_geom, 0.0);
    for (int g = 0; g < n_geom; ++g) {
      const double f0 = stone_f(fE, E, g);
      const double fp = (3.0 * f0 - 4.0 * stone_f(f1, E - h, g) + stone_f(f2, E - 2.0 * h, g)) / (2.0 * h);
      value[g] += ibp_boundary_terms(f0, fp, t, E);
      double bound = 0.0;
      if (m2[g] > 0.0) {
        const double p = m1[g] > m2[g] ? std::clamp(std::log(m1[g] / m2[g]) / std::log(0.875 / 0.625), 1.0, 12.0)
                                       : 1.0;
        const TailEnvelope env{m2[g] * std::pow(E, p) * std::pow(0.75, -p), p, frequency};
        bound = std::min(tail_remainder_integral(env, E) / (t * t), plain_tail_bound(env, E));
      }
      if (errors) (*errors)[g] = quad_err + bound;
    }
    return value;
  }

  std::vector<cplx> correction(double t, std::vector<double>* errors) const {
    if (zero) {
      if (errors) errors->assign(n_geom, 0.0);
      return std::vector<cplx>(n_geom, cplx(0.0));
    }
    // -(1 / 2 pi i) (C+ - C-) u' = -(1 / pi) Im C+ u' = -(1 / pi) q (4 eta^2 + 2)
    const double cut = (t > 1.0 ? 1.0 / std::sqrt(t) : std::pow(t, -0.25)) * opt.cut_scale;
    auto w = [](double eta) { return -(4.0 * eta * eta + 2.0) / pi; };
    std::vector<cplx> v = table_integral(t, 0, w, cut, errors);
    if (errors) {
      const double E = opt.eta_end;
      const double table_term = check_error * (4.0 * E * E * E / 3.0 + 2.0 * E) / pi;
      for (double& e : *errors) e += table_term;
    }
    return v;
  }

  // -(1/2 pi i) F_display = (4 / ||V||_1) int e^{-itu} (4 eta^2 + 2) Re S(eta) d eta
  std::vector<cplx> F_for(double t, const std::vector<Geometry>& gs, FWindow window, double* err) const {
    if (!has_f) throw PreconditionError("F_t needs a zero-energy resonance (verdict " + to_string(cls.verdict) + ")");
    if (!(t > 1.0)) throw DomainError("F_t: t must exceed 1");
    const double scale = 4.0 / d.l1;
    if (window == FWindow::full) {
      if (&gs != &geoms) throw DomainError("F_t: the full window is only available on the tabulated geometries");
      std::vector<double> e;
      auto w = [scale](double eta) { return scale * (4.0 * eta * eta + 2.0); };
      auto v = table_integral(t, n_geom, w, opt.eta_end, &e);
      if (err) *err = *std::max_element(e.begin(), e.end());
      return v;
    }
    const RadiusIndex idx(gs, L);
    auto integrand = [&](double eta, std::vector<cplx>& out) {
      const auto s = block_sandwich(weighted_vectors(eta, idx), idx, "S1_T1inv_S1");
      const cplx ph = std::exp(cplx(0.0, -t * u_of(eta))) * scale * (4.0 * eta * eta + 2.0);
      for (std::size_t g = 0; g < gs.size(); ++g) out[g] = ph * s[g].real();
    };
    return window_quadrature(1.0 / std::sqrt(t), gs.size(), integrand, err);
  }

  // -(1/2 pi i) times the A_{-2} integral: -(1 / pi) int e^{-itu} (4 eta^2 + 2) Im W / eta
  std::vector<cplx> G_for(double t, const std::vector<Geometry>& gs, FWindow window, double* err) const {
    if (!has_g)
      throw PreconditionError("G_t needs a zero-energy eigenvalue (verdict " + to_string(cls.verdict) + ")");
    if (!(t > 1.0)) throw DomainError("G_t: t must exceed 1");
    double ef = 0.0, eg = 0.0;
    std::vector<cplx> out = has_f ? F_for(t, gs, window, &ef) : std::vector<cplx>(gs.size(), cplx(0.0));
    std::vector<cplx> part;
    if (window == FWindow::full) {
      if (&gs != &geoms) throw DomainError("G_t: the full window is only available on the tabulated geometries");
      std::vector<double> e;
      auto w = [](double eta) { return -(4.0 * eta * eta + 2.0) / pi; };
      part = table_integral(t, n_geom * (has_f ? 2 : 1), w, opt.eta_end, &e);
      eg = *std::max_element(e.begin(), e.end());
    } else {
      const RadiusIndex idx(gs, L);
      auto integrand = [&](double eta, std::vector<cplx>& o) {
        const auto w = block_sandwich(weighted_vectors(eta, idx), idx, "A_minus2");
        const cplx ph = std::exp(cplx(0.0, -t * u_of(eta))) * (-(4.0 * eta * eta + 2.0) / pi);
        for (std::size_t g = 0; g < gs.size(); ++g) o[g] = ph * (w[g].imag() / eta);
      };
      part = window_quadrature(1.0 / std::sqrt(t), gs.size(), integrand, &eg);
    }
    for (std::size_t g = 0; g < gs.size(); ++g) out[g] += part[g];
    if (err) *err = ef + eg;
    return out;
  }

  // Gauss-Legendre on [0, cut]; the phase changes by about one radian there.
  // The error estimate compares 24 and 48 nodes.
  static std::vector<cplx> window_quadrature(double cut, std::size_t dim,
                                             const std::function<void(double, std::vector<cplx>&)>& f,
                                             double* err) {
    auto rule = [&](int n) {
      const GaussRule& g = gauss_legendre(n);
      std::vector<cplx> acc(dim, cplx(0.0)), buf(dim);
      for (int k = 0; k < n; ++k) {
        const double eta = 0.5 * cut * (g.x[k] + 1.0);
        f(eta, buf);
        for (std::size_t j = 0; j < dim; ++j) acc[j] += 0.5 * cut * g.w[k] * buf[j];
      }
      return acc;
    };
    const auto coarse = rule(24);
    const auto fine = rule(48);
    if (err) {
      *err = 0.0;
      for (std::size_t j = 0; j < dim; ++j) *err = std::max(*err, std::abs(fine[j] - coarse[j]));
    }
    return fine;
  }
};

Propagator::Propagator(Potential potential, RadialGrid grid, std::vector<Geometry> geometries,
                       PropagatorOptions options)
    : impl_(std::make_unique<Impl>(std::move(potential), std::move(grid), std::move(geometries), options)) {}
Propagator::~Propagator() = default;
Propagator::Propagator(Propagator&&) noexcept = default;

const Classification& Propagator::classification() const { return impl_->cls; }
const std::vector<Geometry>& Propagator::geometries() const { return impl_->geoms; }
const PropagatorOptions& Propagator::options() const { return impl_->opt; }

std::vector<cplx> Propagator::free_part(double t, std::vector<double>* errors) const {
  const auto& gs = impl_->geoms;
  std::vector<cplx> out(gs.size());
  std::vector<double> errs(gs.size());
  parallel_for(gs.size(), [&](std::size_t k) {
    const QuadResult q = free_kernel(t, gs[k].separation(), impl_->opt.tol);
    out[k] = q.value;
    errs[k] = q.error;
  });
  if (errors) *errors = std::move(errs);
  return out;
}

std::vector<cplx> Propagator::correction(double t, std::vector<double>* errors) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("correction: t must be positive");
  return impl_->correction(t, errors);
}

std::vector<cplx> Propagator::F(double t, std::optional<FWindow> window) const {
  return impl_->F_for(t, impl_->geoms, window.value_or(impl_->opt.f_window), nullptr);
}

std::vector<cplx> Propagator::G(double t, std::optional<FWindow> window) const {
  return impl_->G_for(t, impl_->geoms, window.value_or(impl_->opt.f_window), nullptr);
}

std::vector<PropagatorSample> Propagator::evolution(double t, bool subtract_auto) const {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("evolution: t must be positive");
  std::vector<double> ef, ec;
  const auto fr = free_part(t, &ef);
  const auto co = impl_->correction(t, &ec);
  Correction which = Correction::none;
  if (subtract_auto && t > 1.0 && !impl_->zero) {
    const Verdict v = impl_->cls.verdict;
    if (v == Verdict::resonance) which = Correction::F;
    if (v == Verdict::eigenvalue || v == Verdict::resonance_and_eigenvalue) which = Correction::G;
    if (v == Verdict::indeterminate)
      throw PreconditionError("evolution: classification is indeterminate, cannot pick a correction");
  }
  std::vector<cplx> sub(fr.size(), cplx(0.0));
  double es = 0.0;
  if (which == Correction::F) sub = impl_->F_for(t, impl_->geoms, impl_->opt.f_window, &es);
  if (which == Correction::G) sub = impl_->G_for(t, impl_->geoms, impl_->opt.f_window, &es);
  std::vector<PropagatorSample> out(fr.size());
  for (std::size_t k = 0; k < fr.size(); ++k) {
    out[k].t = t;
    out[k].geometry = impl_->geoms[k];
    out[k].value = fr[k] + co[k] - sub[k];
    out[k].correction_subtracted = which;
    out[k].est_error = ef[k] + ec[k] + es;
  }
  return out;
}

std::vector<double> Propagator::q_direct(double eta) const {
  if (!(eta > 0.0)) throw DomainError("q_direct: eta must be positive");
  if (impl_->zero) return std::vector<double>(impl_->n_geom, 0.0);
  std::vector<double> buf(impl_->ncomp);
  impl_->sample(eta, buf.data());
  return {buf.begin(), buf.begin() + impl_->n_geom};
}

std::vector<double> Propagator::q_table(double eta) const {
  if (!(eta >= 0.0) || eta > impl_->opt.eta_end) throw DomainError("q_table: eta outside the table");
  if (impl_->zero) return std::vector<double>(impl_->n_geom, 0.0);
  std::vector<double> buf(impl_->ncomp);
  impl_->evaluate(eta, buf.data());
  return {buf.begin(), buf.begin() + impl_->n_geom};
}

double Propagator::table_check_error() const { return impl_->check_error; }

std::vector<cplx> Propagator::f_sandwich(double eta) const {
  if (!impl_->has_f) throw PreconditionError("f_sandwich: no resonance block");
  return impl_->block_sandwich(impl_->weighted_vectors(eta, impl_->index), impl_->index, "S1_T1inv_S1");
}

std::vector<cplx> Propagator::g_sandwich(double eta) const {
  if (!impl_->has_g) throw PreconditionError("g_sandwich: no eigenvalue block");
  return impl_->block_sandwich(impl_->weighted_vectors(eta, impl_->index), impl_->index, "A_minus2");
}

std::vector<cplx> Propagator::F_at(double t, const std::vector<Geometry>& gs, double* error) const {
  return impl_->F_for(t, gs, FWindow::cutoff, error);
}

std::vector<cplx> Propagator::G_at(double t, const std::vector<Geometry>& gs, double* error) const {
  return impl_->G_for(t, gs, FWindow::cutoff, error);
}

QuadResult F_kernel(double t, const Geometry& g, const Propagator& p) {
  double err = 0.0;
  const auto v = p.F_at(t, {g}, &err);
  return {v[0], err, 0};
}

QuadResult G_kernel(double t, const Geometry& g, const Propagator& p) {
  double err = 0.0;
  const auto v = p.G_at(t, {g}, &err);
  return {v[0], err, 0};
}

PropagatorSample evolution_kernel(double t, const Geometry& g, const Potential& potential, const RadialGrid& grid,
                                  bool subtract_auto, PropagatorOptions options) {
  const Propagator p(potential, grid, {g}, options);
  return p.evolution(t, subtract_auto)[0];
}

}  // namespace quartic
