#pragma once

namespace quartic {

// lambda = eta^4 + eta^2 ties the spectral parameter of H0 = Delta^2 - Delta
// to the momentum-like variable eta used by every kernel formula.
struct SpectralPoint {
  double lambda = 0.0;
  double eta = 0.0;

  static SpectralPoint from_lambda(double lambda);
  static SpectralPoint from_eta(double eta);
};

double eta_of_lambda(double lambda);
double lambda_of_eta(double eta);

// d lambda / d eta = 4 eta^3 + 2 eta
double stone_jacobian(double eta);

}  // namespace quartic
