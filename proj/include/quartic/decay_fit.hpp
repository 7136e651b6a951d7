#pragma once

#include <utility>
#include <vector>

namespace quartic {

// Least-squares power law value ~ prefactor * x^exponent in log-log space.
struct DecayFit {
  double exponent = 0.0;
  double prefactor = 0.0;  // exp(intercept)
  double residual = 0.0;   // max |log residual|
  double window_lo = 0.0;
  double window_hi = 0.0;
  int n_samples = 0;
  bool reliable() const { return residual <= 0.5; }
};

DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples);

// n log-spaced points on [lo, hi], endpoints included.
std::vector<double> log_space(double lo, double hi, int n);

}  // namespace quartic
