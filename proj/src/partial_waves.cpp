#include "quartic/partial_waves.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "quartic/errors.hpp"
#include "quartic/parallel.hpp"
#include "quartic/quadrature.hpp"

namespace quartic {

namespace {
constexpr double pi = std::numbers::pi;
constexpr char magic[8] = {'Q', 'S', 'E', 'C', 'T', 'O', 'P', '\0'};
constexpr std::uint32_t format_version = 1;
}  // namespace

double default_r_max(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw DomainError("default_r_max: needs a finite positive decay exponent");
  return std::pow(10.0, 16.0 / beta) - 1.0;
}

RadialGrid build_grid(int count, double r_max, double beta) {
  if (count < 8) throw DomainError("build_grid: count must be >= 8");
  if (!(r_max > 0.0)) r_max = default_r_max(beta);
  if (!std::isfinite(r_max) || !(r_max > 0.0)) throw DomainError("build_grid: r_max must be finite and positive");
  const GaussRule& g = gauss_legendre(count);
  RadialGrid grid;
  grid.r_max = r_max;
  grid.nodes.resize(count);
  grid.weights.resize(count);
  for (int i = 0; i < count; ++i) {
    grid.nodes[i] = 0.5 * r_max * (g.x[i] + 1.0);
    grid.weights[i] = 0.5 * r_max * g.w[i];
  }
  return grid;
}

int default_n_mu(int ell, double frequency, double r, double r_prime) {
  const double span = 2.0 * std::min(r, r_prime);
  return 2 * ell + 16 + static_cast<int>(std::ceil(0.6 * std::abs(frequency) * span));
}

void legendre_project_all(const SeparationKernel& kernel, int ell_max, double r, double rp, int n_mu,
                          double frequency, cplx* out) {
  if (ell_max < 0) throw DomainError("legendre_project: ell must be >= 0");
  if (!(r >= 0.0) || !(rp >= 0.0)) throw DomainError("legendre_project: radii must be >= 0");
  const double m = std::min(r, rp), M = std::max(r, rp);
  if (m == 0.0) {
    // one of the points sits at the origin: only the s-wave survives
    out[0] = 4.0 * pi * kernel(M);
    for (int l = 1; l <= ell_max; ++l) out[l] = 0.0;
    return;
  }
  if (n_mu <= 0) n_mu = default_n_mu(ell_max, frequency, r, rp);
  if (n_mu < 2 * ell_max + 16) throw DomainError("legendre_project: n_mu must be >= 2 ell + 16");
  const GaussRule& g = gauss_legendre(n_mu);
  std::vector<cplx> acc(ell_max + 1, cplx(0.0));
  std::vector<double> p(ell_max + 1);
  const double d = M - m;
  for (int k = 0; k < n_mu; ++k) {
    const double x1 = 1.0 + g.x[k];
    const double s = d + m * x1;
    // mu(s) written without the cancellation in r^2 + r'^2 - s^2
    const double mu = std::clamp(1.0 - x1 * d / M - 0.5 * m * x1 * x1 / M, -1.0, 1.0);
    const cplx ks = kernel(s);
    if (!std::isfinite(ks.real()) || !std::isfinite(ks.imag()))
      throw DomainError("legendre_project: kernel returned a non-finite value");
    legendre_values(ell_max, mu, p.data());
    const cplx base = g.w[k] * s * ks;
    for (int l = 0; l <= ell_max; ++l) acc[l] += base * p[l];
  }
  // d mu = -(s / (r r')) ds and ds = m dx
  for (int l = 0; l <= ell_max; ++l) out[l] = 2.0 * pi / M * acc[l];
}

cplx legendre_project(const SeparationKernel& kernel, int ell, double r, double rp, int n_mu, double frequency) {
  std::vector<cplx> all(ell + 1);
  if (n_mu <= 0) n_mu = default_n_mu(ell, frequency, r, rp);
  legendre_project_all(kernel, ell, r, rp, n_mu, frequency, all.data());
  return all[ell];
}

std::vector<SectorOperator> build_sector_operators(const SeparationKernel& kernel, int ell_max,
                                                   const RadialGrid& grid, double frequency) {
  const int n = grid.count();
  std::vector<SectorOperator> ops(ell_max + 1);
  for (int l = 0; l <= ell_max; ++l) {
    ops[l].ell = l;
    ops[l].grid = grid;
    ops[l].matrix.resize(n, n);
  }
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    std::vector<cplx> k(ell_max + 1);
    const double si = std::sqrt(grid.weights[i]) * grid.nodes[i];
    for (int j = i; j < n; ++j) {
      legendre_project_all(kernel, ell_max, grid.nodes[i], grid.nodes[j], 0, frequency, k.data());
      const double sj = std::sqrt(grid.weights[j]) * grid.nodes[j];
      for (int l = 0; l <= ell_max; ++l) {
        const cplx a = si * k[l] * sj;
        ops[l].matrix(i, j) = a;
        ops[l].matrix(j, i) = a;
      }
    }
  });
  return ops;
}

SectorOperator build_sector_operator(const SeparationKernel& kernel, int ell, const RadialGrid& grid,
                                     double frequency) {
  if (ell < 0) throw DomainError("build_sector_operator: ell must be >= 0");
  auto ops = build_sector_operators(kernel, ell, grid, frequency);
  return std::move(ops[ell]);
}

Eigen::MatrixXcd sector_vectors(const SeparationKernel& kernel, int ell_max, const RadialGrid& grid, double r,
                                double frequency) {
  const int n = grid.count();
  Eigen::MatrixXcd out(n, ell_max + 1);
  std::vector<cplx> k(ell_max + 1);
  for (int i = 0; i < n; ++i) {
    legendre_project_all(kernel, ell_max, r, grid.nodes[i], 0, frequency, k.data());
    const double si = std::sqrt(grid.weights[i]) * grid.nodes[i];
    for (int l = 0; l <= ell_max; ++l) out(i, l) = k[l] * si;
  }
  return out;
}

cplx resum_sectors(const std::vector<cplx>& values, double cos_gamma) {
  if (values.empty()) return 0.0;
  if (!(std::abs(cos_gamma) <= 1.0)) throw DomainError("resum_sectors: |cos gamma| must be <= 1");
  const int lmax = static_cast<int>(values.size()) - 1;
  std::vector<double> p(lmax + 1);
  legendre_values(lmax, cos_gamma, p.data());
  cplx sum = 0.0;
  for (int l = 0; l <= lmax; ++l) sum += (2.0 * l + 1.0) / (4.0 * pi) * values[l] * p[l];
  return sum;
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw FormatError("sector operator: truncated stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_sector_operator(std::ostream& out, const SectorOperator& op) {
  out.write(magic, sizeof magic);
  put<std::uint32_t>(out, format_version);
  put<std::int32_t>(out, op.ell);
  put<std::int32_t>(out, op.grid.count());
  put<double>(out, op.grid.r_max);
  const int n = op.grid.count();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      put<double>(out, op.matrix(i, j).real());
      put<double>(out, op.matrix(i, j).imag());
    }
  if (!out) throw FormatError("sector operator: write failed");
}

SectorOperator read_sector_operator(std::istream& in) {
  char head[sizeof magic];
  if (!in.read(head, sizeof head) || std::memcmp(head, magic, sizeof magic) != 0)
    throw FormatError("sector operator: bad magic");
  const auto version = get<std::uint32_t>(in);
  if (version != format_version) throw FormatError("sector operator: unsupported version " + std::to_string(version));
  const auto ell = get<std::int32_t>(in);
  const auto count = get<std::int32_t>(in);
  const auto r_max = get<double>(in);
  if (ell < 0 || count < 8 || count > 100000 || !(r_max > 0.0) || !std::isfinite(r_max))
    throw FormatError("sector operator: invalid header");
  SectorOperator op;
  op.ell = ell;
  op.grid = build_grid(count, r_max);
  op.matrix.resize(count, count);
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      op.matrix(i, j) = {re, im};
    }
  return op;
}

void save_sector_operator(const std::string& path, const SectorOperator& op) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("sector operator: cannot open " + path);
  write_sector_operator(out, op);
}

SectorOperator load_sector_operator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("sector operator: cannot open " + path);
  return read_sector_operator(in);
}

}  // namespace quartic
