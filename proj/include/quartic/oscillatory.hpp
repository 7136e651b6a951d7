#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "quartic/decay_fit.hpp"

namespace quartic {

using cplx = std::complex<double>;

struct IntegrationPlan {
  double t = 1.0;
  double a = 0.0;
  double b = 1.0;
  double tol = 1e-10;
  long max_panels = 1L << 22;
};

struct SplitPoints {
  enum class Regime { small_time, large_time };
  double low_cut = 1.0;
  Regime regime = Regime::small_time;
};

// low_cut = t^{-1/4} for t <= 1 and t^{-1/2} for t > 1.
SplitPoints split_points(double t);

struct QuadResult {
  cplx value;
  double error = 0.0;
  long panels = 0;
};

struct BatchResult {
  std::vector<cplx> value;
  double error = 0.0;  // largest component error estimate
  long panels = 0;
};

using Amplitude = std::function<cplx(double)>;
// Fills out[0..dim) at eta; must be safe to call concurrently.
using BatchAmplitude = std::function<void(double, cplx*)>;

// I = int_a^b e^{-i t u(eta)} f(eta) u'(eta) d eta with u = eta^4 + eta^2.
// Panels span at most one period 2 pi / |t| in u; inside each panel the
// 15-point Gauss-Legendre nodes sit in eta, so f with a 1/eta or sqrt-type
// behaviour at eta = 0 is still integrated smoothly against u'. The error
// estimate compares each panel against its two halves; panels are bisected
// until the estimate meets tol * (1 + |I|). Throws ConvergenceError past
// max_panels.
QuadResult stone_integral(const Amplitude& f, const IntegrationPlan& plan);
BatchResult stone_integral(const BatchAmplitude& f, int dim, const IntegrationPlan& plan);

// Same engine for int_a^b e^{-i t u(eta)} g(eta) d eta (no Jacobian).
BatchResult oscillatory_integral(const BatchAmplitude& g, int dim, const IntegrationPlan& plan);

// Caller-asserted decay model for improper tails:
//   |f^{(k)}(eta)| <= amplitude * (frequency + decay / eta)^k * eta^{-decay},  k = 0, 1, 2.
struct TailEnvelope {
  double amplitude = 1.0;
  double decay = 1.0;
  double frequency = 0.0;
};

struct TailResult {
  std::vector<cplx> value;
  double truncation_bound = 0.0;  // certified bound on the discarded remainder
  double quadrature_error = 0.0;
  double eta_max = 0.0;
  long panels = 0;
};

// int_a^infinity e^{-i t u} f u' d eta. The finite part [a, eta_max] goes to
// stone_integral; beyond eta_max two integration-by-parts boundary terms are
// added in closed form and the remaining integral is bounded by
// (1/t^2) int |d/d eta (f'/u')| from the envelope. eta_max is doubled until that
// bound (or the plain bound int |f| u' when it is smaller) drops below tol.
TailResult improper_tail(const BatchAmplitude& f, int dim, double t, double a,
                         const TailEnvelope& envelope, double tol, long max_panels = 1L << 22,
                         double eta_cap = 1e4);
TailResult improper_tail(const Amplitude& f, double t, double a, const TailEnvelope& envelope,
                         double tol, long max_panels = 1L << 22, double eta_cap = 1e4);

// Envelope bound on int_eta^infinity |d/d eta (f'/u')| d eta.
double tail_remainder_integral(const TailEnvelope& envelope, double eta);

// Envelope bound on int_eta^infinity |f| u' d eta; infinite unless decay > 4.
double plain_tail_bound(const TailEnvelope& envelope, double eta);

// The two boundary terms that integration by parts leaves at eta for
// int_eta^inf e^{-itu} f u' d eta, given f and f' there.
cplx ibp_boundary_terms(cplx f, cplx f_prime, double t, double eta);

// int along the ray eta = a + s e^{-i theta}, s in [0, inf), of e^{-i t u} f u'.
// For f analytic on the wedge between [a, inf) and the ray and growing at most
// like e^{growth |Im eta|}, Cauchy's theorem makes this equal to the real-axis
// tail whenever t u'(a) > growth; along the ray the integrand then decays
// monotonically. theta must lie in (0, pi/8].
QuadResult ray_tail(const std::function<cplx(cplx)>& f, double t, double a, double growth,
                    double tol, double theta = 0.39269908169872414);

// Fits |int_0^inf e^{-i t u} g d eta| against t on the given grid. Throws
// FitError when every sample vanishes or the fit residual exceeds 0.5.
DecayFit van_der_corput_probe(const std::function<double(double)>& g, const std::vector<double>& t_grid,
                              double support_end, double tol = 1e-12);

}  // namespace quartic
