#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "quartic/errors.hpp"
#include "quartic/partial_waves.hpp"
#include "quartic/quadrature.hpp"
#include "quartic/resolvent_kernels.hpp"

using namespace quartic;
using std::numbers::pi;

namespace {

cplx newton(double s) { return 1.0 / (4.0 * pi * s); }

// int_a^b g(x) dx with a composite 40-point rule, used by the radial oracles
template <class F>
double integrate(F g, double a, double b, int panels = 60) {
  const GaussRule& q = gauss_legendre(40);
  double acc = 0.0;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    for (std::size_t k = 0; k < q.x.size(); ++k) {
      const double x = a + h * (p + 0.5 * (q.x[k] + 1));
      acc += 0.5 * h * q.w[k] * g(x);
    }
  return acc;
}

}  // namespace

TEST_CASE("grid exactness") {
  for (int count : {8, 16, 40}) {
    const RadialGrid g = build_grid(count, 3.7);
    for (int k = 0; k <= 2 * count - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < count; ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
      const double exact = std::pow(3.7, k + 1) / (k + 1);
      CHECK(std::abs(s - exact) / exact < 1e-12);
    }
    for (int i = 0; i < count; ++i) {
      CHECK(g.weights[i] > 0.0);
      CHECK(g.nodes[i] > 0.0);
      if (i) CHECK(g.nodes[i] > g.nodes[i - 1]);
    }
  }
}

TEST_CASE("gamma integral on 64 nodes") {
  const RadialGrid g = build_grid(64, 30.0);
  double s = 0.0;
  for (int i = 0; i < 64; ++i) s += g.weights[i] * std::exp(-g.nodes[i]) * g.nodes[i] * g.nodes[i];
  const double exact = 2.0 - std::exp(-30.0) * (900.0 + 60.0 + 2.0);
  CHECK(std::abs(s - exact) < 1e-10);
}

TEST_CASE("refinement leaves norms unchanged") {
  auto f = [](double r) { return std::exp(-r) * (1 + r * r); };
  double prev = 0.0;
  for (int count : {32, 64, 128}) {
    const RadialGrid g = build_grid(count, 40.0);
    double n2 = 0.0;
    for (int i = 0; i < count; ++i) n2 += g.weights[i] * g.nodes[i] * g.nodes[i] * f(g.nodes[i]) * f(g.nodes[i]);
    if (prev > 0) CHECK(std::abs(std::sqrt(n2) - prev) < 1e-9);
    prev = std::sqrt(n2);
  }
}

TEST_CASE("default radius") {
  const double r = default_r_max(4.0);
  CHECK(std::pow(1 + r, -2.0) == doctest::Approx(1e-8).epsilon(1e-10));
  CHECK(build_grid(16, 0.0, 4.0).r_max == r);
  CHECK_THROWS_AS(build_grid(4, 1.0), DomainError);
  CHECK_THROWS_AS(build_grid(16, -1.0, 0.0), DomainError);
}

TEST_CASE("Newton kernel sectors") {
  for (auto [r, rp] : {std::pair{1.0, 2.0}, {0.3, 0.31}, {2.0, 2.0}, {5.0, 0.1}}) {
    CHECK(std::abs(legendre_project(newton, 0, r, rp) - 1.0 / std::max(r, rp)) < 1e-12);
    const double lo = std::min(r, rp), hi = std::max(r, rp);
    for (int l = 0; l <= 6; ++l) {
      const double ref = std::pow(lo, l) / std::pow(hi, l + 1) / (2 * l + 1);
      CHECK(std::abs(legendre_project(newton, l, r, rp).real() - ref) < 1e-8);
    }
  }
}

TEST_CASE("constant kernel lives in the s-wave") {
  auto c = [](double) { return cplx(2.5); };
  CHECK(std::abs(legendre_project(c, 0, 1.3, 0.7) - 4 * pi * 2.5) < 1e-12);
  for (int l = 1; l <= 5; ++l) CHECK(std::abs(legendre_project(c, l, 1.3, 0.7)) < 1e-12);
}

TEST_CASE("sector orthogonality for a synthetic pure-l kernel") {
  const double r = 1.2, rp = 0.8;
  for (int lp = 0; lp <= 4; ++lp) {
    // K(s) = P_lp(mu(s)) at this (r, r')
    auto k = [=](double s) {
      const double mu = (r * r + rp * rp - s * s) / (2 * r * rp);
      double p[8];
      legendre_values(lp, mu, p);
      return cplx(p[lp]);
    };
    for (int l = 0; l <= 6; ++l) {
      const cplx v = legendre_project(k, l, r, rp, 40);
      const double ref = l == lp ? 4 * pi / (2 * l + 1) : 0.0;
      CHECK(std::abs(v - ref) < 1e-10);
    }
  }
}

TEST_CASE("n_mu floor") {
  CHECK_THROWS_AS(legendre_project(newton, 3, 1.0, 2.0, 10), DomainError);
}

TEST_CASE("zero kernel gives zero matrix") {
  const RadialGrid g = build_grid(16, 5.0);
  const SectorOperator op = build_sector_operator([](double) { return cplx(0.0); }, 1, g);
  CHECK(op.matrix.norm() == 0.0);
  CHECK(op.ell == 1);
}

namespace {

// G0 = Newton - Yukawa; for radial f both convolutions reduce to 1D integrals:
//   Newton * f (r) = (1/r) int_0^r f r'^2 + int_r^R f r'
//   Yukawa * f (r) = (1/r) [e^{-r} int_0^r sinh(r') f r' + sinh(r) int_r^R e^{-r'} f r']
double g0_on_exp(double r, double R) {
  auto f = [](double x) { return std::exp(-x); };
  const double nw = integrate([&](double x) { return f(x) * x * x; }, 0, r) / r +
                    integrate([&](double x) { return f(x) * x; }, r, R);
  const double yk = (std::exp(-r) * integrate([&](double x) { return std::sinh(x) * f(x) * x; }, 0, r) +
                     std::sinh(r) * integrate([&](double x) { return std::exp(-x) * f(x) * x; }, r, R)) /
                    r;
  return nw - yk;
}

}  // namespace

TEST_CASE("G0 block against the radial Green's function formulas") {
  const double R = 30.0;
  const RadialGrid g = build_grid(160, R);
  const SectorOperator op = build_sector_operator([](double s) { return cplx(expansion_G(0, s)); }, 0, g);
  Eigen::VectorXcd c(g.count());
  for (int i = 0; i < g.count(); ++i) c(i) = std::sqrt(g.weights[i]) * g.nodes[i] * std::exp(-g.nodes[i]);
  const Eigen::VectorXcd out = op.matrix * c;
  for (int i = 0; i < g.count(); i += 5) {
    const double r = g.nodes[i];
    if (r > 20) break;
    const cplx got = out(i) / (std::sqrt(g.weights[i]) * r);
    const double ref = g0_on_exp(r, R);
    CHECK(std::abs(got - ref) < 1e-6 * std::abs(ref));
  }
}

TEST_CASE("symmetric real block and conjugation") {
  const RadialGrid g = build_grid(24, 6.0);
  const SectorOperator a = build_sector_operator([](double s) { return cplx(expansion_G(2, s)); }, 1, g);
  CHECK((a.matrix - a.matrix.transpose()).norm() <= 1e-12 * a.matrix.norm());
  auto rp = [](double s) { return free_resolvent(Sign::plus, 1.3, s); };
  auto rm = [](double s) { return free_resolvent(Sign::minus, 1.3, s); };
  const SectorOperator p = build_sector_operator(rp, 2, g, 1.3);
  const SectorOperator m = build_sector_operator(rm, 2, g, 1.3);
  CHECK((m.matrix - p.matrix.adjoint()).norm() <= 1e-12 * p.matrix.norm());
  CHECK((m.matrix - p.matrix.conjugate()).norm() <= 1e-12 * p.matrix.norm());
}

TEST_CASE("symmetrised bilinear form is the radial pairing") {
  // <h, G0 f> = int h(r) (G0 * f)(r) r^2 dr for f = e^{-r}, h = e^{-2r}
  const double R = 30.0;
  const RadialGrid grid = build_grid(120, R);
  const SectorOperator op = build_sector_operator([](double s) { return cplx(expansion_G(0, s)); }, 0, grid);
  Eigen::VectorXcd cf(120), ch(120);
  for (int i = 0; i < 120; ++i) {
    const double s = std::sqrt(grid.weights[i]) * grid.nodes[i];
    cf(i) = s * std::exp(-grid.nodes[i]);
    ch(i) = s * std::exp(-2 * grid.nodes[i]);
  }
  const cplx form = ch.transpose() * op.matrix * cf;
  const double ref = integrate([&](double r) { return std::exp(-2 * r) * g0_on_exp(r, R) * r * r; }, 0, 20, 8);
  CHECK(std::abs(form - ref) < 1e-6 * ref);
}

TEST_CASE("off-grid sector vectors reproduce matrix rows at the nodes") {
  const RadialGrid g = build_grid(16, 4.0);
  auto k = [](double s) { return free_resolvent(Sign::plus, 0.7, s); };
  const auto ops = build_sector_operators(k, 2, g, 0.7);
  const Eigen::MatrixXcd vec = sector_vectors(k, 2, g, g.nodes[5], 0.7);
  for (int l = 0; l <= 2; ++l)
    for (int j = 0; j < 16; ++j) {
      const cplx row = ops[l].matrix(5, j) / (std::sqrt(g.weights[5]) * g.nodes[5]);
      CHECK(std::abs(vec(j, l) - row) < 1e-14 * (1 + std::abs(row)));
    }
}

TEST_CASE("resummation") {
  SUBCASE("Newton kernel at (1, 2, pi/3)") {
    std::vector<cplx> k;
    for (int l = 0; l <= 40; ++l) k.push_back(legendre_project(newton, l, 1.0, 2.0));
    const double sep = std::sqrt(1 + 4 - 4 * 0.5);
    CHECK(std::abs(resum_sectors(k, 0.5) - newton(sep)) < 1e-6);
  }
  SUBCASE("s-wave alone is isotropic") {
    const std::vector<cplx> k{cplx(0.3, 0.1)};
    CHECK(resum_sectors(k, -1.0) == resum_sectors(k, 0.4));
  }
  SUBCASE("free resolvent at three geometries") {
    auto kern = [](double s) { return free_resolvent(Sign::plus, 0.5, s); };
    for (auto [r, rp, c] : {std::tuple{1.0, 2.0, 0.3}, {0.5, 1.5, -0.7}, {2.0, 3.0, 0.9}}) {
      std::vector<cplx> k(41);
      legendre_project_all(kern, 40, r, rp, 0, 0.5, k.data());
      const double sep = std::sqrt(r * r + rp * rp - 2 * r * rp * c);
      CHECK(std::abs(resum_sectors(k, c) - kern(sep)) < 1e-5);
    }
  }
  SUBCASE("error shrinks with ell_max") {
    const double r = 1.0, rp = 1.6, c = 0.2;
    const double sep = std::sqrt(r * r + rp * rp - 2 * r * rp * c);
    std::vector<cplx> k(61);
    legendre_project_all(newton, 60, r, rp, 0, 0.0, k.data());
    double prev = INFINITY;
    for (int L = 4; L <= 60; L += 8) {
      const double err = std::abs(resum_sectors(std::vector<cplx>(k.begin(), k.begin() + L + 1), c) - newton(sep));
      CHECK(err <= prev * 1.0001 + 1e-14);
      prev = err;
    }
    CHECK(prev < 1e-10);
  }
  CHECK_THROWS_AS(resum_sectors({cplx(1.0)}, 1.5), DomainError);
}

TEST_CASE("binary round trip") {
  const RadialGrid g = build_grid(12, 3.0);
  const SectorOperator op =
      build_sector_operator([](double s) { return free_resolvent(Sign::plus, 0.9, s); }, 2, g, 0.9);
  std::stringstream buf;
  write_sector_operator(buf, op);
  const std::string bytes = buf.str();
  CHECK(bytes.size() == 8 + 4 + 4 + 4 + 8 + 12 * 12 * 16);
  CHECK(bytes.substr(0, 7) == "QSECTOP");
  std::istringstream in(bytes);
  const SectorOperator back = read_sector_operator(in);
  CHECK(back.ell == 2);
  CHECK(back.grid.r_max == 3.0);
  CHECK(back.matrix == op.matrix);
  CHECK(back.grid.nodes == g.nodes);

  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream in2(bad);
  CHECK_THROWS_AS(read_sector_operator(in2), FormatError);
  std::istringstream in3(bytes.substr(0, 100));
  CHECK_THROWS_AS(read_sector_operator(in3), FormatError);
  std::string wrong_version = bytes;
  wrong_version[8] = 9;
  std::istringstream in4(wrong_version);
  CHECK_THROWS_AS(read_sector_operator(in4), FormatError);
}
