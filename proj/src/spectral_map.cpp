#include "quartic/spectral_map.hpp"

#include <cmath>
#include <string>

#include "quartic/errors.hpp"

namespace quartic {

double eta_of_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw DomainError("eta_of_lambda: lambda must be finite and >= 0, got " +
                      std::to_string(lambda));
  // eta^2 = sqrt(1/4 + lambda) - 1/2, rationalised so small lambda keeps its digits
  const double eta2 = lambda / (std::sqrt(0.25 + lambda) + 0.5);
  return std::sqrt(eta2);
}

double lambda_of_eta(double eta) {
  if (!std::isfinite(eta) || eta < 0.0)
    throw DomainError("lambda_of_eta: eta must be finite and >= 0");
  const double e2 = eta * eta;
  return e2 * e2 + e2;
}

double stone_jacobian(double eta) {
  if (!std::isfinite(eta) || eta < 0.0)
    throw DomainError("stone_jacobian: eta must be finite and >= 0");
  return 4.0 * eta * eta * eta + 2.0 * eta;
}

SpectralPoint SpectralPoint::from_lambda(double lambda) {
  return {lambda, eta_of_lambda(lambda)};
}

SpectralPoint SpectralPoint::from_eta(double eta) { return {lambda_of_eta(eta), eta}; }

}  // namespace quartic
