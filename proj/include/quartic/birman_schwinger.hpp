#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "quartic/partial_waves.hpp"
#include "quartic/potential.hpp"
#include "quartic/resolvent_kernels.hpp"

namespace quartic {

// Sector kernels used by the Birman-Schwinger algebra.
SeparationKernel resolvent_kernel(Sign sign, double eta);
SeparationKernel expansion_kernel(int j);

// M^{+-}(lambda) = U + v R0^{+-} v in sector ell. At eta = 0 this is T0.
SectorOperator build_M(Sign sign, double eta, const Potential& potential, const RadialGrid& grid, int ell);
std::vector<SectorOperator> build_M_all(Sign sign, double eta, const Potential& potential, const RadialGrid& grid,
                                        int ell_max);

// T0 = U + v G0 v, assembled from G0 directly.
SectorOperator build_T0(const Potential& potential, const RadialGrid& grid, int ell);

// v G_j v in sector ell.
SectorOperator build_vGv(int j, const Potential& potential, const RadialGrid& grid, int ell);

// Projection onto span(v); lives in the s-wave only.
SectorOperator build_P(const Potential& potential, const RadialGrid& grid);

enum class Verdict { regular, resonance, eigenvalue, resonance_and_eigenvalue, indeterminate };
std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct SectorSpectrum {
  int ell = 0;
  std::vector<double> t0_singular;  // ascending, smallest few
  double sigma_max = 0.0;
  double threshold = 0.0;           // tol * sigma_max
  double gap_ratio = 0.0;           // first kept / first discarded (or / threshold when none discarded)
  bool ambiguous = false;
  Eigen::MatrixXd s1;               // orthonormal null vectors of T0, columns
  std::vector<double> t1_singular;  // singular values of S1 P S1 on span(S1)
  Eigen::MatrixXd s2;               // orthonormal null vectors of T1 inside span(S1)
  std::vector<double> t2_singular;  // singular values of S2 v G2 v S2
  std::vector<double> v_overlap;    // |<vhat, phi>| / |vhat| per s2 vector
  double t1_gap_ratio = 0.0;
};

struct Classification {
  Verdict verdict = Verdict::indeterminate;
  int ell_max = 0;
  double tol = 1e-7;
  double l1_norm = 0.0;
  std::vector<SectorSpectrum> sectors;
  std::vector<std::string> diagnostics;
  int s1_dim() const;
  int s2_dim() const;
};

Classification classify(const Potential& potential, const RadialGrid& grid, int ell_max = 2, double tol = 1e-7);

// Versioned JSON report of a classification.
std::string classification_report(const Classification& c, const Potential& potential, const RadialGrid& grid);

// Jensen-Nenciu inverse
//   M^{-1} = (M+S)^{-1} + (M+S)^{-1} S M1^{-1} S (M+S)^{-1},  M1 = S - S (M+S)^{-1} S.
// S must be an orthogonal projection. Throws SingularityError naming "M+S" or
// "M1" when a factor has condition number above 1e12.
Eigen::MatrixXcd jn_invert(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& S);

enum class ExpansionCase { regular = 1, resonance = 2, eigenvalue = 3 };

// Per-sector blocks of the small-eta expansion of (M^{+-})^{-1}.
//   regular:     T0_inv, first_order_plus = -i (||V||_1 / 4 pi) T0^{-1} P T0^{-1}
//   resonance:   M_minus1_plus = -i (4 pi / ||V||_1) S1 T1^{-1} S1, M_0
//   eigenvalue:  A_minus2 = S2 (S2 v G2 v S2)^{-1} S2, A_minus1_plus, A_0_plus (fitted)
// The minus blocks are the complex conjugates of the plus blocks.
struct ExpansionCoefficients {
  ExpansionCase expansion_case = ExpansionCase::regular;
  std::map<int, std::map<std::string, Eigen::MatrixXcd>> blocks;  // ell -> name -> block
  double rho = 0.0;            // trace(P D0 P), resonance case
  bool surrogate = false;      // true when blocks come from the least-squares fit
  double fit_residual = 0.0;
  double fit_envelope = 0.0;
  const Eigen::MatrixXcd& block(int ell, const std::string& name) const;
  bool has(int ell, const std::string& name) const;
};

ExpansionCoefficients leading_coefficients(const Classification& c, const Potential& potential,
                                           const RadialGrid& grid);

struct TuneResult {
  double coupling = 0.0;         // c*
  Eigen::VectorXd null_vector;   // eigenvector of T0(c*) closest to zero
  double eigenvalue = 0.0;       // that eigenvalue
  double sigma_max = 0.0;
  int iterations = 0;
};

// Bisection on the number of positive eigenvalues of T0(c) in sector ell: c*
// is the first coupling above c_lo where one more eigenvalue crosses zero.
// Throws BracketError if no crossing lies in [c_lo, c_hi].
TuneResult resonance_tune(const std::function<Potential(double)>& family, int ell, double c_lo, double c_hi,
                          const RadialGrid& grid, double tol = 1e-14);

// psi = -G0 v phi at the given radii, for a coefficient vector phi in sector ell.
Eigen::VectorXd zero_mode(const Eigen::VectorXd& phi, const Potential& potential, const RadialGrid& grid, int ell,
                          const std::vector<double>& radii);

}  // namespace quartic
