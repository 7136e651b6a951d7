#include "quartic/resolvent_kernels.hpp"

#include <cmath>
#include <numbers>

#include "quartic/errors.hpp"

namespace quartic {

namespace {

constexpr double pi = std::numbers::pi;

void check(double eta, double r, const char* who) {
  if (!std::isfinite(eta) || !std::isfinite(r) || eta < 0.0 || r < 0.0)
    throw DomainError(std::string(who) + ": eta and r must be finite and >= 0");
}

// (e^{i eta r} - e^{-kappa r}) / r without cancellation:
//   e^{i x} - 1 = -2 sin^2(x/2) + i sin x  and  1 - e^{-y} = -expm1(-y).
cplx numerator_over_r(double eta, double kappa, double r) {
  if (r == 0.0) return {kappa, eta};
  const double h = std::sin(0.5 * eta * r);
  const double re = (-2.0 * h * h - std::expm1(-kappa * r)) / r;
  const double im = std::sin(eta * r) / r;
  return {re, im};
}

}  // namespace

cplx free_resolvent(Sign sign, double eta, double r) {
  check(eta, r, "free_resolvent");
  const double kappa = std::sqrt(1.0 + eta * eta);
  const cplx n = numerator_over_r(eta, kappa, r) / (4.0 * pi * (1.0 + 2.0 * eta * eta));
  return sign == Sign::plus ? n : std::conj(n);
}

cplx free_resolvent_diff(double eta, double r) {
  check(eta, r, "free_resolvent_diff");
  const double s = r == 0.0 ? eta : std::sin(eta * r) / r;
  return {0.0, s / (2.0 * pi * (1.0 + 2.0 * eta * eta))};
}

cplx free_resolvent_deta(Sign sign, double eta, double r) {
  check(eta, r, "free_resolvent_deta");
  const double kappa = std::sqrt(1.0 + eta * eta);
  const double q = 1.0 + 2.0 * eta * eta;
  // d/d eta [N(eta, r) / r] = i e^{i eta r} + (eta / kappa) e^{-kappa r}
  const cplx dn = cplx(-std::sin(eta * r), std::cos(eta * r)) + (eta / kappa) * std::exp(-kappa * r);
  const cplx n = numerator_over_r(eta, kappa, r);
  const cplx d = (-4.0 * eta / (q * q) * n + dn / q) / (4.0 * pi);
  return sign == Sign::plus ? d : std::conj(d);
}

double expansion_G(int j, double r) {
  if (!std::isfinite(r) || r < 0.0) throw DomainError("expansion_G: r must be finite and >= 0");
  // (1 - e^{-r}) / r, equal to 1 at r = 0
  const double a = r == 0.0 ? 1.0 : -std::expm1(-r) / r;
  const double e = std::exp(-r);
  switch (j) {
    case 0:
      return a / (4.0 * pi);
    case 1:
      return 1.0 / (4.0 * pi);
    case 2:
      // r -> 0: 1/(8 pi) - 1/(2 pi) = -3/(8 pi)
      return (-r + e) / (8.0 * pi) - a / (2.0 * pi);
    case 3:
      return -1.0 / (2.0 * pi) - r * r / (24.0 * pi);
    case 4:
      // r -> 0: 1/pi - 1/(4 pi) - 1/(32 pi) = 23/(32 pi)
      return a / pi + (r - e) / (4.0 * pi) + r * r * r / (96.0 * pi) - (1.0 + r) * e / (32.0 * pi);
    default:
      throw DomainError("expansion_G: j must be in 0..4");
  }
}

cplx expansion_partial_sum(Sign sign, double eta, double r, int order) {
  if (order < 0 || order > 4) throw DomainError("expansion_partial_sum: order must be in 0..4");
  check(eta, r, "expansion_partial_sum");
  const double s = sign_factor(sign);
  cplx sum = 0.0;
  double p = 1.0;
  for (int j = 0; j <= order; ++j) {
    const double g = expansion_G(j, r) * p;
    sum += (j % 2 == 0) ? cplx(g, 0.0) : cplx(0.0, s * g);
    p *= eta;
  }
  return sum;
}

cplx free_resolvent_diff_continued(cplx eta, double r) {
  const cplx s = r == 0.0 ? eta : std::sin(eta * r) / r;
  return cplx(0.0, 1.0) * s / (2.0 * pi * (1.0 + 2.0 * eta * eta));
}

}  // namespace quartic
