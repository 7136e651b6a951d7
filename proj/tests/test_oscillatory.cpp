#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "quartic/errors.hpp"
#include "quartic/oscillatory.hpp"
#include "quartic/quadrature.hpp"
#include "quartic/resolvent_kernels.hpp"

using namespace quartic;
using std::numbers::pi;

namespace {

double u(double eta) { return eta * eta * eta * eta + eta * eta; }

// int_{3/2}^inf e^{-i t x^2} dx along x = 3/2 + s e^{-i pi/4}, where the
// integrand decays like e^{-t s^2}.
cplx fresnel_tail(double t) {
  const cplx dir = std::polar(1.0, -pi / 4);
  const GaussRule& g = gauss_legendre(60);
  cplx acc = 0.0;
  const double S = 12.0 / std::sqrt(t);
  const int panels = 40;
  for (int p = 0; p < panels; ++p) {
    const double s0 = S * p / panels, h = S / panels;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
      const double s = s0 + 0.5 * h * (g.x[k] + 1);
      const cplx x = 1.5 + s * dir;
      acc += 0.5 * h * g.w[k] * std::exp(cplx(0, -t) * x * x) * dir;
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("split points") {
  CHECK(split_points(1.0).low_cut == 1.0);
  CHECK(split_points(100.0).low_cut == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(split_points(100.0).regime == SplitPoints::Regime::large_time);
  CHECK(split_points(1.0 / 16).low_cut == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(split_points(1.0 / 16).regime == SplitPoints::Regime::small_time);
  CHECK_THROWS_AS(split_points(0.0), DomainError);
  CHECK_THROWS_AS(split_points(-3.0), DomainError);
}

TEST_CASE("zero amplitude") {
  const QuadResult r = stone_integral([](double) { return cplx(0.0); }, {3.0, 0.0, 2.0, 1e-12});
  CHECK(r.value == cplx(0.0));
}

TEST_CASE("exact derivative") {
  const double t = 3.0, A = 2.0;
  const QuadResult r = stone_integral([](double) { return cplx(1.0); }, {t, 0.0, A, 1e-13});
  const cplx exact = (1.0 - std::exp(cplx(0, -t * u(A)))) / cplx(0, t);
  CHECK(std::abs(r.value - exact) < 1e-10);
  CHECK(r.error < 1e-10);
}

TEST_CASE("difference kernel at t = 50 against composite Simpson") {
  // phase advance t u'(10) h ~ 0.05 rad per step; the Euler-Maclaurin boundary
  // term then sits near 1e-13 relative to the result
  const double t = 50.0, b = 10.0;
  auto f = [](double eta) { return free_resolvent_diff(eta, 1.0); };
  const long n = 1L << 25;
  const double h = b / n;
  cplx acc = 0.0;
  for (long k = 0; k <= n; ++k) {
    const double eta = h * k;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double ph = -t * u(eta);
    acc += w * cplx(std::cos(ph), std::sin(ph)) * f(eta) * (4 * eta * eta * eta + 2 * eta);
  }
  const cplx oracle = acc * h / 3.0;
  const QuadResult r = stone_integral(f, {t, 0.0, b, 1e-13});
  CHECK(std::abs(r.value - oracle) / std::abs(oracle) < 1e-6);
}

TEST_CASE("linearity, additivity and conjugation") {
  auto f = [](double eta) { return cplx(std::exp(-eta), 0.0); };
  auto g = [](double eta) { return cplx(1.0 / (1.0 + eta * eta), 0.0); };
  const cplx a(0.3, -1.2), b(2.0, 0.5);
  const IntegrationPlan p{7.0, 0.2, 2.5, 1e-13};
  const cplx lf = stone_integral(f, p).value, lg = stone_integral(g, p).value;
  const cplx lc = stone_integral([&](double e) { return a * f(e) + b * g(e); }, p).value;
  CHECK(std::abs(lc - (a * lf + b * lg)) < 1e-12);

  const cplx left = stone_integral(f, {7.0, 0.2, 1.1, 1e-13}).value;
  const cplx right = stone_integral(f, {7.0, 1.1, 2.5, 1e-13}).value;
  CHECK(std::abs(left + right - lf) < 1e-12);

  const cplx back = stone_integral(f, {-7.0, 0.2, 2.5, 1e-13}).value;
  CHECK(std::abs(back - std::conj(lf)) < 1e-12);
}

TEST_CASE("panel count grows at most linearly in the number of periods") {
  auto f = [](double eta) { return cplx(1.0 / (1.0 + 2 * eta * eta), 0.0); };
  for (double t : {10.0, 100.0, 1000.0, 10000.0}) {
    const QuadResult r = stone_integral(f, {t, 0.0, 3.0, 1e-10});
    const double periods = t * u(3.0) / (2 * pi);
    CHECK(r.panels <= 4 * periods + 64);
  }
}

TEST_CASE("convergence error past max_panels") {
  auto f = [](double) { return cplx(1.0); };
  CHECK_THROWS_AS(stone_integral(f, {1e4, 0.0, 10.0, 1e-12, 100}), ConvergenceError);
  try {
    stone_integral(f, {1e4, 0.0, 10.0, 1e-12, 100});
  } catch (const ConvergenceError& e) {
    CHECK(std::string(e.kind()) == "convergence");
  }
}

TEST_CASE("domain errors") {
  auto f = [](double) { return cplx(1.0); };
  CHECK_THROWS_AS(stone_integral(f, {0.0, 0.0, 1.0, 1e-10}), DomainError);
  CHECK_THROWS_AS(stone_integral(f, {1.0, 1.0, 0.5, 1e-10}), DomainError);
  CHECK_THROWS_AS(stone_integral(f, {1.0, 0.0, INFINITY, 1e-10}), DomainError);
}

TEST_CASE("improper tail of 1/(1+2 eta^2) is a Fresnel integral") {
  // with x = eta^2 + 1/2: int_1^inf e^{-itu} 2 eta d eta = e^{it/4} int_{3/2}^inf e^{-i t x^2} dx
  for (double t : {10.0, 3.0, 40.0}) {
    const TailEnvelope env{1.0, 2.0, 0.0};
    const TailResult r =
        improper_tail([](double eta) { return cplx(1.0 / (1 + 2 * eta * eta)); }, t, 1.0, env, 1e-9);
    const cplx oracle = std::exp(cplx(0, t / 4)) * fresnel_tail(t);
    CHECK(std::abs(r.value[0] - oracle) < 1e-6 * std::abs(oracle));
    CHECK(std::abs(r.value[0] - oracle) < r.truncation_bound + r.quadrature_error + 1e-12);
  }
}

TEST_CASE("compactly supported amplitude matches the finite integral") {
  auto f = [](double eta) {
    return eta < 3.0 ? cplx((eta - 1) * (eta - 1) * (3 - eta) * (3 - eta)) : cplx(0.0);
  };
  const TailResult r = improper_tail(f, 5.0, 1.0, TailEnvelope{1e6, 10.0, 0.0}, 1e-11);
  const QuadResult direct = stone_integral(f, {5.0, 1.0, 3.0, 1e-13});
  CHECK(std::abs(r.value[0] - direct.value) < 1e-10);
}

TEST_CASE("tightening the tail changes it by less than the reported bound") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dt(5.0, 20.0), da(0.5, 3.0), dc(0.5, 2.0);
  for (int k = 0; k < 20; ++k) {
    const double t = dt(rng), a = da(rng), c = dc(rng);
    auto f = [c](double eta) { return cplx(c / (1 + 2 * eta * eta), 0.0); };
    const TailEnvelope env{c, 2.0, 0.0};
    const TailResult coarse = improper_tail(f, t, a, env, 1e-5);
    const TailResult fine = improper_tail(f, t, a, env, 1e-8);
    CHECK(fine.eta_max >= coarse.eta_max);
    CHECK(std::abs(fine.value[0] - coarse.value[0]) <=
          coarse.truncation_bound + coarse.quadrature_error + fine.truncation_bound + fine.quadrature_error);
  }
}

TEST_CASE("tail that cannot be certified") {
  auto f = [](double eta) { return cplx(1.0 / eta); };
  CHECK_THROWS_AS(improper_tail(f, 1e-3, 1.0, TailEnvelope{1.0, 1.0, 0.0}, 1e-14, 1L << 22, 64.0),
                  TruncationError);
}

TEST_CASE("ray tail agrees with the real-axis Fresnel value") {
  const double t = 10.0;
  auto f = [](cplx eta) { return 1.0 / (1.0 + 2.0 * eta * eta); };
  const QuadResult r = ray_tail(f, t, 1.0, 0.0, 1e-12);
  const cplx oracle = std::exp(cplx(0, t / 4)) * fresnel_tail(t);
  CHECK(std::abs(r.value - oracle) < 1e-10);
}

TEST_CASE("van der Corput probe") {
  SUBCASE("gaussian amplitude decays like t^{-1/2}") {
    const DecayFit f = van_der_corput_probe([](double e) { return std::exp(-e * e); }, log_space(1e2, 1e4, 9),
                                             6.0, 1e-10);
    CHECK(f.exponent >= -0.65);
    CHECK(f.exponent <= -0.40);
  }
  SUBCASE("zero amplitude is rejected") {
    CHECK_THROWS_AS(van_der_corput_probe([](double) { return 0.0; }, log_space(1e2, 1e4, 9), 2.0), FitError);
  }
  SUBCASE("bump away from the stationary point decays at least like 1/t") {
    auto bump = [](double e) { return e > 1.0 && e < 2.0 ? (e - 1) * (2 - e) : 0.0; };
    const DecayFit f = van_der_corput_probe(bump, log_space(10, 1e3, 9), 2.0);
    CHECK(f.exponent <= -1.0 + 0.15);
  }
}
