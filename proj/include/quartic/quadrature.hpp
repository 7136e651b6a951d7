#pragma once

#include <vector>

namespace quartic {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached and thread-safe; the returned reference stays valid for the program lifetime.
const GaussRule& gauss_legendre(int n);

// Legendre P_0..P_lmax at x by upward recurrence.
void legendre_values(int lmax, double x, double* out);

}  // namespace quartic
