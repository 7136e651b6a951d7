#include "quartic/potential.hpp"

#include <cmath>
#include <numbers>

#include "quartic/errors.hpp"

namespace quartic {

double Potential::v(double r) const { return std::sqrt(std::abs(V(r))); }

double Potential::support_radius(double threshold) const {
  if (is_zero()) return 1.0;
  double peak = 0.0;
  const int n = 200000;
  const double r_end = 1e4;
  // geometric mesh: fine near the origin, coarse far out
  auto radius = [&](int k) { return std::expm1(std::log1p(r_end) * k / n); };
  for (int k = 0; k <= n; ++k) peak = std::max(peak, v(radius(k)));
  if (peak == 0.0) return 1.0;
  for (int k = n; k >= 0; --k)
    if (v(radius(k)) >= threshold * peak) return std::max(radius(std::min(k + 1, n)), 1e-3);
  return 1.0;
}

Potential Potential::zero() { return Potential{}; }

Potential Potential::gaussian(double coupling) {
  Potential p;
  p.name = "gaussian";
  p.profile = [](double r) { return std::exp(-r * r); };
  p.beta = 8.0;  // decays faster than any power; 8 clears every beta hypothesis used
  p.coupling = coupling;
  return p;
}

Potential Potential::exponential(double coupling) {
  Potential p;
  p.name = "exponential";
  p.profile = [](double r) { return std::exp(-r); };
  p.beta = 8.0;
  p.coupling = coupling;
  return p;
}

Potential Potential::polynomial(double coupling, double decay) {
  if (!(decay > 0.0)) throw DomainError("polynomial potential: decay exponent must be positive");
  Potential p;
  p.name = "polynomial";
  p.profile = [decay](double r) { return std::pow(1.0 + r, -decay); };
  p.beta = decay;
  p.coupling = coupling;
  p.parameter = decay;
  return p;
}

Potential Potential::from_name(const std::string& name, double coupling, double parameter) {
  if (name == "zero") return zero();
  if (name == "gaussian") return gaussian(coupling);
  if (name == "exponential") return exponential(coupling);
  if (name == "polynomial") return polynomial(coupling, parameter);
  throw DomainError("unknown potential profile '" + name + "'");
}

DiscretePotential discretize(const Potential& pot, const RadialGrid& grid) {
  const int n = grid.count();
  DiscretePotential d;
  d.v.resize(n);
  d.U.resize(n);
  d.vhat.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = grid.nodes[i];
    d.v(i) = pot.v(r);
    d.U(i) = pot.U(r);
    d.vhat(i) = std::sqrt(grid.weights[i]) * r * d.v(i);
    d.envelope_constant = std::max(d.envelope_constant, std::abs(pot.V(r)) * std::pow(1.0 + r, pot.beta));
  }
  d.l1 = 4.0 * std::numbers::pi * d.vhat.squaredNorm();
  return d;
}

}  // namespace quartic
