#include "quartic/decay_fit.hpp"

#include <algorithm>
#include <cmath>

#include "quartic/errors.hpp"

namespace quartic {

DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 5) throw DomainError("fit_decay: need at least 5 samples");
  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0;
  for (auto [x, y] : samples) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y))
      throw DomainError("fit_decay: abscissae and values must be positive and finite");
    sx += std::log(x);
    sy += std::log(y);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (auto [x, y] : samples) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (sxx == 0.0) throw DomainError("fit_decay: abscissae must not all coincide");
  DecayFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.prefactor = std::exp(intercept);
  fit.window_lo = samples.front().first;
  fit.window_hi = samples.front().first;
  for (auto [x, y] : samples) {
    fit.residual = std::max(fit.residual,
                            std::abs(std::log(y) - intercept - fit.exponent * std::log(x)));
    fit.window_lo = std::min(fit.window_lo, x);
    fit.window_hi = std::max(fit.window_hi, x);
  }
  fit.n_samples = static_cast<int>(samples.size());
  return fit;
}

std::vector<double> log_space(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw DomainError("log_space: need 0 < lo <= hi, n >= 1");
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace quartic
