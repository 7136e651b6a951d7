#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace quartic {

using cplx = std::complex<double>;

// Gauss-Legendre nodes on (0, r_max]; weights integrate dr.
struct RadialGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double r_max = 0.0;
  int count() const { return static_cast<int>(nodes.size()); }
};

// Radius where (1 + r)^{-beta/2} drops below 1e-8.
double default_r_max(double beta);

// r_max <= 0 selects default_r_max(beta).
RadialGrid build_grid(int count, double r_max, double beta = 0.0);

// A translation-invariant kernel as a function of |x - y|. It must be finite at
// every separation it is asked for (use the analytic limits at 0).
using SeparationKernel = std::function<cplx(double)>;

// Node count used when n_mu <= 0 is passed: 2 ell + 16 plus enough points to
// follow e^{i frequency s} across the separation interval of length 2 min(r, r').
int default_n_mu(int ell, double frequency, double r, double r_prime);

// K_l(r, r') = 2 pi int_{-1}^{1} K(|x - y|) P_l(mu) d mu.
// The integral runs in the separation s = sqrt(r^2 + r'^2 - 2 r r' mu), where
// s K(s) is smooth for every kernel used here (the 1/s singularity is absorbed
// by the Jacobian), so Gauss-Legendre converges fast even when r ~ r'.
cplx legendre_project(const SeparationKernel& kernel, int ell, double r, double r_prime, int n_mu = 0,
                      double frequency = 0.0);

// All sectors 0..ell_max from one set of kernel samples.
void legendre_project_all(const SeparationKernel& kernel, int ell_max, double r, double r_prime, int n_mu,
                          double frequency, cplx* out);

// Symmetrised Nystrom block A_ij = sqrt(w_i) r_i K_l(r_i, r_j) r_j sqrt(w_j).
// With this convention coefficient vectors c_i = sqrt(w_i) r_i f(r_i) carry the
// L^2(r^2 dr) inner product and operator composition is a matrix product.
struct SectorOperator {
  int ell = 0;
  RadialGrid grid;
  Eigen::MatrixXcd matrix;
};

SectorOperator build_sector_operator(const SeparationKernel& kernel, int ell, const RadialGrid& grid,
                                     double frequency = 0.0);
std::vector<SectorOperator> build_sector_operators(const SeparationKernel& kernel, int ell_max,
                                                   const RadialGrid& grid, double frequency = 0.0);

// Off-grid evaluation vectors: column l holds K_l(r, r_i) sqrt(w_i) r_i.
Eigen::MatrixXcd sector_vectors(const SeparationKernel& kernel, int ell_max, const RadialGrid& grid, double r,
                                double frequency = 0.0);

// sum_l (2 l + 1) / (4 pi) K_l P_l(cos gamma)
cplx resum_sectors(const std::vector<cplx>& sector_values, double cos_gamma);

// Portable binary persistence: magic, version, ell, count, r_max, then
// row-major little-endian (re, im) doubles.
void write_sector_operator(std::ostream& out, const SectorOperator& op);
SectorOperator read_sector_operator(std::istream& in);
void save_sector_operator(const std::string& path, const SectorOperator& op);
SectorOperator load_sector_operator(const std::string& path);

}  // namespace quartic
