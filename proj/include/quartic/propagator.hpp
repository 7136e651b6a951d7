#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <optional>
#include <vector>

#include "quartic/birman_schwinger.hpp"
#include "quartic/oscillatory.hpp"
#include "quartic/partial_waves.hpp"
#include "quartic/potential.hpp"

namespace quartic {

struct Geometry {
  double r = 0.0;
  double r_prime = 0.0;
  double cos_gamma = 1.0;
  double separation() const;
};

// Default sampling set for sup-over-geometry proxies: |x|, |y| in {0, 0.5, 1, 2}
// with the two points aligned or opposite.
std::vector<Geometry> default_geometry_grid();

enum class Correction { none, F, G };
std::string to_string(Correction c);

struct PropagatorSample {
  double t = 0.0;
  Geometry geometry;
  cplx value;
  Correction correction_subtracted = Correction::none;
  double est_error = 0.0;
};

// e^{-itH0}(x, y) as a function of |x - y|:
//   (1 / 2 pi i) int_0^inf e^{-it(eta^4+eta^2)} (R0+ - R0-)(eta, r) (4 eta^3 + 2 eta) d eta.
// The real-axis part runs up to a point past the stationary point of
// t u(eta) - eta r; the remainder is taken along a ray into the lower half
// plane, where the integrand decays (see ray_tail).
QuadResult free_kernel(double t, double separation, double tol = 1e-12);

struct ResolventValue {
  cplx value;
  double truncation_estimate = 0.0;  // |last sector term| / |sector sum|
  bool truncation_warning = false;
};

// R_V^{+-}(x, y) = R0^{+-}(|x-y|) - sum_l (2l+1)/(4 pi) P_l(cos gamma) [(R0 v) M^{-1} (v R0)]_l(r, r').
ResolventValue perturbed_resolvent(Sign sign, double eta, const Geometry& g, const Potential& potential,
                                   const RadialGrid& grid, int ell_max, double truncation_tol = 1e-3);

// Largest singular value of diag((1+r)^{-s'}) R_V sector matrix diag((1+r)^{-s}),
// maximised over sectors 0..ell_max. derivative = 1 gives the same norm of
// d R_V / d lambda by a centred difference in lambda.
double weighted_norm(Sign sign, double eta, const Potential& potential, const RadialGrid& grid, int ell_max,
                     double s, double s_prime, int derivative = 0);

enum class FWindow { cutoff, full };  // cutoff: eta in [0, t^{-1/2}]

struct PropagatorOptions {
  int ell_max = 2;
  double eta_end = 6.0;     // tabulation end; beyond it the tail is handled by parts
  double panel_width = 0.25;
  int panel_nodes = 20;     // Chebyshev nodes per panel
  double tol = 1e-12;
  double classify_tol = 1e-7;
  double cut_scale = 1.0;   // multiplies the low-energy cut (splitting-consistency checks)
  FWindow f_window = FWindow::cutoff;
};

// Stone-formula synthesis of e^{-itH} P_ac(H)(x, y) for a fixed potential and
// set of geometries. Construction classifies zero, extracts the expansion
// blocks when needed and tabulates eta * Im C+(eta; geometry) on Chebyshev
// panels, where C+ is the sector sandwich of the symmetric resolvent identity.
// That table is the memoised (M+)^{-1} cache; evaluations are read-only.
class Propagator {
 public:
  Propagator(Potential potential, RadialGrid grid, std::vector<Geometry> geometries, PropagatorOptions options = {});
  ~Propagator();
  Propagator(Propagator&&) noexcept;

  const Classification& classification() const;
  const std::vector<Geometry>& geometries() const;
  const PropagatorOptions& options() const;

  // Full kernel at every geometry, optionally with F_t / G_t removed.
  // subtract_auto picks F for a resonance and G for an eigenvalue when t > 1.
  std::vector<PropagatorSample> evolution(double t, bool subtract_auto) const;

  // Pieces. correction(t) is -(1/2 pi i) int e^{-itu} (C+ - C-) du.
  std::vector<cplx> free_part(double t, std::vector<double>* errors = nullptr) const;
  std::vector<cplx> correction(double t, std::vector<double>* errors = nullptr) const;

  // The operators subtracted from e^{-itH} P_ac, i.e. -(1 / 2 pi i) times the
  // displayed F and G integrals. Need t > 1.
  std::vector<cplx> F(double t, std::optional<FWindow> window = std::nullopt) const;
  std::vector<cplx> G(double t, std::optional<FWindow> window = std::nullopt) const;

  // Windowed F / G at arbitrary geometries with an error estimate.
  std::vector<cplx> F_at(double t, const std::vector<Geometry>& geometries, double* error = nullptr) const;
  std::vector<cplx> G_at(double t, const std::vector<Geometry>& geometries, double* error = nullptr) const;

  // Direct (untabulated) eta * Im C+(eta) per geometry; used to check the table.
  std::vector<double> q_direct(double eta) const;
  std::vector<double> q_table(double eta) const;
  double table_check_error() const;

  // Sector sandwiches at eta for every geometry (ell = 0 block S1 T1^{-1} S1 for F,
  // A_{-2} for G), before the angular factor is dropped.
  std::vector<cplx> f_sandwich(double eta) const;
  std::vector<cplx> g_sandwich(double eta) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Single-geometry entry points. F_kernel and G_kernel use the windowed form.
QuadResult F_kernel(double t, const Geometry& g, const Propagator& p);
QuadResult G_kernel(double t, const Geometry& g, const Propagator& p);
PropagatorSample evolution_kernel(double t, const Geometry& g, const Potential& potential, const RadialGrid& grid,
                                  bool subtract_auto, PropagatorOptions options = {});

}  // namespace quartic
