#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "quartic/partial_waves.hpp"

namespace quartic {

// V(r) = coupling * profile(r). A well has negative coupling.
struct Potential {
  std::string name = "zero";
  std::function<double(double)> profile;  // empty means V = 0
  double beta = 0.0;                       // asserted decay exponent, |V| <~ (1+r)^{-beta}
  double coupling = 0.0;
  double parameter = 0.0;                  // profile parameter (polynomial decay exponent)

  double V(double r) const { return profile ? coupling * profile(r) : 0.0; }
  double v(double r) const;  // sqrt|V|
  double U(double r) const { return V(r) >= 0.0 ? 1.0 : -1.0; }
  bool is_zero() const { return !profile || coupling == 0.0; }

  // Smallest radius beyond which v(r) stays below threshold * max v (scanned on a
  // fine mesh out to 1e4). Used to size the radial grid for fast-decaying wells.
  double support_radius(double threshold = 1e-8) const;

  static Potential zero();
  static Potential gaussian(double coupling);     // coupling * e^{-r^2}
  static Potential exponential(double coupling);  // coupling * e^{-r}
  static Potential polynomial(double coupling, double decay);  // coupling * (1 + r)^{-decay}
  static Potential from_name(const std::string& name, double coupling, double parameter = 0.0);
};

// Potential sampled on a grid in the symmetrised convention.
struct DiscretePotential {
  Eigen::VectorXd v;     // sqrt|V(r_i)|
  Eigen::VectorXd U;     // sign indicator
  Eigen::VectorXd vhat;  // sqrt(w_i) r_i v_i, the coefficient vector of v
  double l1 = 0.0;       // ||V||_1 = 4 pi sum w_i r_i^2 |V_i| = 4 pi |vhat|^2
  // max_i |V(r_i)| (1 + r_i)^beta, the constant in the asserted envelope
  double envelope_constant = 0.0;
};

DiscretePotential discretize(const Potential& potential, const RadialGrid& grid);

}  // namespace quartic
