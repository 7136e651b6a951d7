#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quartic/birman_schwinger.hpp"
#include "quartic/errors.hpp"
#include "quartic/propagator.hpp"
#include "quartic/quadrature.hpp"
#include "quartic/resolvent_kernels.hpp"
#include "quartic/spectral_map.hpp"

using namespace quartic;
using std::numbers::pi;

namespace {

RadialGrid well_grid() { return build_grid(64, Potential::gaussian(-1.0).support_radius(), 8.0); }

double critical(int ell) {
  static const double c0 = resonance_tune(Potential::gaussian, 0, -5.0625, -3.375, well_grid()).coupling;
  static const double c1 = resonance_tune(Potential::gaussian, 1, -57.665, -38.4434, well_grid()).coupling;
  return ell == 0 ? c0 : c1;
}

std::vector<Geometry> few_geometries() { return {{0.0, 0.5, 1.0}, {0.5, 1.0, -1.0}, {1.0, 1.0, 1.0}}; }

// At r = 0 the Stone amplitude is eta / (4 pi^2 (1 + 2 eta^2)). On the ray
// eta = rho e^{-i pi/8} the phase becomes e^{-t rho^4} times a decaying factor,
// and no pole lies between the ray and the real axis.
cplx free_kernel_origin(double t) {
  const cplx dir = std::polar(1.0, -pi / 8);
  const int n = 400000;
  const double R = 8.0 / std::pow(t, 0.25), h = R / n;
  cplx acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double rho = h * (k - 0.5);
    const cplx eta = rho * dir;
    const cplx u = eta * eta * eta * eta + eta * eta;
    const cplx du = 4.0 * eta * eta * eta + 2.0 * eta;
    acc += std::exp(cplx(0, -t) * u) * eta / (1.0 + 2.0 * eta * eta) * du * dir;
  }
  return acc * h / (4 * pi * pi);
}

// int R0(|x - z|) e^{-|z|^2} R0(|z - y|) d^3 z in spherical coordinates
cplx born_oracle(double eta, const Geometry& g) {
  const double sg = std::sqrt(1.0 - g.cos_gamma * g.cos_gamma);
  const double x[3] = {0.0, 0.0, g.r};
  const double y[3] = {g.r_prime * sg, 0.0, g.r_prime * g.cos_gamma};
  const GaussRule& gr = gauss_legendre(120);
  const GaussRule& gc = gauss_legendre(64);
  const int nphi = 96;
  const double R = 6.5;
  cplx acc = 0.0;
  for (std::size_t i = 0; i < gr.x.size(); ++i) {
    const double rho = 0.5 * R * (gr.x[i] + 1);
    const double wr = 0.5 * R * gr.w[i] * rho * rho * std::exp(-rho * rho);
    for (std::size_t j = 0; j < gc.x.size(); ++j) {
      const double c = gc.x[j], s = std::sqrt(1 - c * c);
      for (int k = 0; k < nphi; ++k) {
        const double phi = 2 * pi * (k + 0.5) / nphi;
        const double z[3] = {rho * s * std::cos(phi), rho * s * std::sin(phi), rho * c};
        const double dx = std::hypot(z[0] - x[0], z[1] - x[1], z[2] - x[2]);
        const double dy = std::hypot(z[0] - y[0], z[1] - y[1], z[2] - y[2]);
        acc += wr * gc.w[j] * (2 * pi / nphi) * free_resolvent(Sign::plus, eta, dx) *
               free_resolvent(Sign::plus, eta, dy);
      }
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("geometry separation") {
  CHECK(Geometry{1.0, 2.0, 1.0}.separation() == doctest::Approx(1.0));
  CHECK(Geometry{1.0, 2.0, -1.0}.separation() == doctest::Approx(3.0));
  CHECK(Geometry{3.0, 4.0, 0.0}.separation() == doctest::Approx(5.0));
  CHECK(Geometry{1.0, 1.0, 1.0}.separation() == 0.0);
  CHECK(default_geometry_grid().size() == 16);
}

TEST_CASE("free kernel at the origin against a rotated contour") {
  const double t = 5.0;
  const cplx oracle = free_kernel_origin(t);
  const QuadResult r = free_kernel(t, 0.0, 1e-12);
  CHECK(std::abs(r.value - oracle) < 1e-5 * std::abs(oracle));
  CHECK_THROWS_AS(free_kernel(0.0, 1.0), DomainError);
  CHECK_THROWS_AS(free_kernel(1.0, -1.0), DomainError);
}

TEST_CASE("free kernel small and large time regimes") {
  // |K(t, 0)| ~ 0.01552 t^{-3/4} for small t and 0.02245 t^{-3/2} for large t
  CHECK(std::abs(free_kernel(1e-4, 0.0).value) * std::pow(1e-4, 0.75) == doctest::Approx(0.01552).epsilon(2e-2));
  CHECK(std::abs(free_kernel(1e4, 0.0).value) * std::pow(1e4, 1.5) == doctest::Approx(0.02245).epsilon(2e-2));
}

TEST_CASE("perturbed resolvent") {
  const RadialGrid grid = well_grid();
  const Geometry g{0.5, 1.2, 0.3};

  SUBCASE("zero potential gives the free resolvent") {
    for (double eta : {0.0, 0.3, 2.0})
      CHECK(perturbed_resolvent(Sign::plus, eta, g, Potential::zero(), grid, 4).value ==
            free_resolvent(Sign::plus, eta, g.separation()));
  }
  SUBCASE("minus is the conjugate of plus") {
    const Potential p = Potential::gaussian(-2.0);
    for (double eta : {0.1, 1.0}) {
      const cplx a = perturbed_resolvent(Sign::plus, eta, g, p, grid, 4).value;
      const cplx b = perturbed_resolvent(Sign::minus, eta, g, p, grid, 4).value;
      CHECK(std::abs(b - std::conj(a)) <= 1e-13 * std::abs(a));
    }
  }
  SUBCASE("first Born term for a weak potential") {
    const double eps = 1e-4, eta = 0.8;
    const cplx rv = perturbed_resolvent(Sign::plus, eta, g, Potential::gaussian(-eps), grid, 10).value;
    const cplx born = (rv - free_resolvent(Sign::plus, eta, g.separation())) / eps;
    const cplx oracle = born_oracle(eta, g);
    CHECK(std::abs(born - oracle) < 1e-3 * std::abs(oracle));
  }
  SUBCASE("truncation estimate") {
    const Potential p = Potential::gaussian(-2.0);
    const Geometry wide{2.0, 2.0, -1.0};
    CHECK(perturbed_resolvent(Sign::plus, 1.0, wide, p, grid, 1).truncation_warning);
    const ResolventValue fine = perturbed_resolvent(Sign::plus, 1.0, wide, p, grid, 14);
    CHECK(fine.truncation_estimate < 1e-3);
    CHECK_FALSE(fine.truncation_warning);
  }
  SUBCASE("singular M at a zero-energy resonance") {
    CHECK_THROWS_AS(perturbed_resolvent(Sign::plus, 0.0, g, Potential::gaussian(critical(0)), grid, 2),
                    SingularityError);
    try {
      perturbed_resolvent(Sign::plus, 0.0, g, Potential::gaussian(critical(0)), grid, 2);
    } catch (const SingularityError& e) {
      CHECK(std::string(e.what()).find("l=0") != std::string::npos);
    }
  }
  SUBCASE("domain errors") {
    CHECK_THROWS_AS(perturbed_resolvent(Sign::plus, -1.0, g, Potential::zero(), grid, 2), DomainError);
    CHECK_THROWS_AS(perturbed_resolvent(Sign::plus, 1.0, {-1.0, 0.0, 1.0}, Potential::zero(), grid, 2),
                    DomainError);
    CHECK_THROWS_AS(perturbed_resolvent(Sign::plus, 1.0, {1.0, 1.0, 1.5}, Potential::zero(), grid, 2),
                    DomainError);
  }
}

TEST_CASE("regular case: the jump across the cut vanishes like eta") {
  const RadialGrid grid = well_grid();
  const Potential p = Potential::gaussian(-1.0);
  const Geometry g{0.5, 1.0, 1.0};
  std::vector<double> q;
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    const cplx a = perturbed_resolvent(Sign::plus, eta, g, p, grid, 2).value;
    const cplx b = perturbed_resolvent(Sign::minus, eta, g, p, grid, 2).value;
    q.push_back(std::abs(a - b) / eta);
  }
  CHECK(q[1] == doctest::Approx(q[2]).epsilon(1e-2));
  CHECK(q[0] == doctest::Approx(q[2]).epsilon(5e-2));
}

TEST_CASE("weighted resolvent norm") {
  const RadialGrid grid = build_grid(48, 12.0);
  const double lo = weighted_norm(Sign::plus, eta_of_lambda(1e2), Potential::zero(), grid, 1, 2.0, 2.0);
  const double hi = weighted_norm(Sign::plus, eta_of_lambda(1e4), Potential::zero(), grid, 1, 2.0, 2.0);
  // the free resolvent decays like lambda^{-3/4}
  CHECK(std::log(hi / lo) / std::log(100.0) == doctest::Approx(-0.75).epsilon(0.1));
  CHECK_THROWS_AS(weighted_norm(Sign::plus, 1.0, Potential::zero(), grid, 1, 0.5, 2.0), DomainError);
  CHECK_THROWS_AS(weighted_norm(Sign::plus, 1.0, Potential::zero(), grid, 1, 2.0, 2.0, 2), DomainError);
}

TEST_CASE("propagator for the zero potential is the free kernel") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dr(0.0, 2.0), dc(-1.0, 1.0), dt(0.1, 50.0);
  std::vector<Geometry> gs;
  for (int k = 0; k < 6; ++k) gs.push_back({dr(rng), dr(rng), dc(rng)});
  const Propagator p(Potential::zero(), well_grid(), gs);
  CHECK(p.classification().verdict == Verdict::regular);
  for (int k = 0; k < 3; ++k) {
    const double t = dt(rng);
    const auto ev = p.evolution(t, true);
    for (std::size_t i = 0; i < gs.size(); ++i) {
      CHECK(std::abs(ev[i].value - free_kernel(t, gs[i].separation()).value) < 1e-8);
      CHECK(ev[i].correction_subtracted == Correction::none);
    }
  }
  CHECK(p.q_table(1.0) == std::vector<double>(gs.size(), 0.0));
}

TEST_CASE("regular well") {
  const Propagator p(Potential::gaussian(-1.0), well_grid(), few_geometries());
  CHECK(p.classification().verdict == Verdict::regular);

  SUBCASE("table agrees with direct evaluation") {
    CHECK(p.table_check_error() < 1e-10);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> de(0.01, 6.0);
    for (int k = 0; k < 10; ++k) {
      const double eta = de(rng);
      const auto a = p.q_table(eta), b = p.q_direct(eta);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-9);
    }
    CHECK_THROWS_AS(p.q_table(7.0), DomainError);
  }
  SUBCASE("moving the low-energy cut changes nothing beyond the error estimate") {
    PropagatorOptions o;
    o.cut_scale = 2.0;
    const Propagator q(Potential::gaussian(-1.0), well_grid(), few_geometries(), o);
    std::vector<double> ea, eb;
    const auto a = p.correction(30.0, &ea);
    const auto b = q.correction(30.0, &eb);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= ea[i] + eb[i] + 1e-12);
  }
  SUBCASE("F and G need the matching threshold") {
    CHECK_THROWS_AS(p.F(10.0), PreconditionError);
    CHECK_THROWS_AS(p.G(10.0), PreconditionError);
    CHECK_THROWS_AS(p.f_sandwich(0.1), PreconditionError);
  }
}

TEST_CASE("resonant well: F") {
  std::vector<Geometry> gs;
  const double radii[] = {0.0, 0.5, 1.0, 2.0};
  for (double a : radii)
    for (double b : radii) gs.push_back({a, b, 1.0});
  const Propagator p(Potential::gaussian(critical(0)), well_grid(), gs);
  REQUIRE(p.classification().verdict == Verdict::resonance);

  SUBCASE("F is an l = 0 sandwich of a one-dimensional block, so nearly rank one") {
    const auto f = p.F(100.0);
    Eigen::MatrixXcd m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i, j) = f[4 * i + j];
    const auto s = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
    CHECK(s(1) < 0.05 * s(0));
    CHECK((m - m.transpose()).norm() < 1e-12 * m.norm());
  }
  SUBCASE("F decays") {
    const double a = std::abs(p.F(10.0)[0]), b = std::abs(p.F(1000.0)[0]);
    CHECK(b < a);
    CHECK(std::isfinite(a));
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(p.F(1.0), DomainError);
    CHECK_THROWS_AS(p.G(10.0), PreconditionError);
  }
  SUBCASE("windowed F at arbitrary geometries matches the tabulated set") {
    double err = 0.0;
    const auto a = p.F_at(50.0, gs, &err);
    const auto b = p.F(50.0, FWindow::cutoff);
    for (std::size_t i = 0; i < gs.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-13 + err);
  }
}

TEST_CASE("eigenvalue well: G") {
  const Propagator p(Potential::gaussian(critical(1)), well_grid(), few_geometries());
  REQUIRE(p.classification().verdict == Verdict::eigenvalue);

  SUBCASE("the A_-2 jump divided by eta stays bounded as eta -> 0") {
    std::vector<std::vector<cplx>> w;
    for (double eta : {1e-6, 1e-4, 1e-2}) w.push_back(p.g_sandwich(eta));
    for (std::size_t i = 0; i < w[0].size(); ++i) {
      const double q6 = w[0][i].imag() / 1e-6, q4 = w[1][i].imag() / 1e-4, q2 = w[2][i].imag() / 1e-2;
      CHECK(std::isfinite(q6));
      // the l = 1 jump of the sector vectors is higher order, so the ratio even shrinks
      CHECK(std::abs(q6) <= std::abs(q2));
      CHECK(std::abs(q4) <= std::abs(q2));
    }
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(p.G(0.5), DomainError);
    CHECK_THROWS_AS(p.F(10.0), PreconditionError);
    CHECK(std::abs(G_kernel(10.0, few_geometries()[0], p).value - p.G(10.0)[0]) < 1e-12);
  }
}
