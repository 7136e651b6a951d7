#pragma once

#include <complex>

namespace quartic {

using cplx = std::complex<double>;

// Selects the boundary value R0+ (from above the real axis) or R0-.
enum class Sign { plus, minus };

inline double sign_factor(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }
inline Sign opposite(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

// R0^{+-}(lambda; r) = (e^{+-i eta r} - e^{-sqrt(1+eta^2) r}) / (4 pi r (1 + 2 eta^2)),
// with r = |x - y|. Finite at r = 0.
cplx free_resolvent(Sign sign, double eta, double r);

// Kernel of R0+ - R0-: (i / 2 pi) sin(eta r) / (r (1 + 2 eta^2)).
cplx free_resolvent_diff(double eta, double r);

// d/d eta of free_resolvent, for eta > 0.
cplx free_resolvent_deta(Sign sign, double eta, double r);

// G_0 .. G_4 from the small-eta expansion
//   R0^{+-} = G0 +- i eta G1 + eta^2 G2 +- i eta^3 G3 + eta^4 G4 + O(eta^5 r^4).
double expansion_G(int j, double r);

cplx expansion_partial_sum(Sign sign, double eta, double r, int order);

// Analytic continuation of free_resolvent_diff to complex eta. Used only by the
// contour tails of the propagator; the pole at eta = +-i/sqrt(2) is the
// caller's problem.
cplx free_resolvent_diff_continued(cplx eta, double r);

}  // namespace quartic
