#include "quartic/birman_schwinger.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "quartic/decay_fit.hpp"
#include "quartic/errors.hpp"

namespace quartic {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double max_condition = 1e12;
constexpr int reported_singular_values = 6;

Eigen::MatrixXcd sandwich(const Eigen::MatrixXcd& A, const DiscretePotential& d) {
  return d.v.asDiagonal() * A * d.v.asDiagonal();
}

Eigen::MatrixXd real_sandwich(const Eigen::MatrixXcd& A, const DiscretePotential& d) {
  return d.v.asDiagonal() * A.real() * d.v.asDiagonal();
}

// scale floors sigma_max; a block whose natural size is known (M1 lives on
// range(S), where S is the identity) must not look well conditioned just
// because every entry is rounding noise
double condition_number(const Eigen::MatrixXcd& A, double scale = 0.0) {
  if (A.size() == 0) return 1.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? std::max(s(0), scale) / smin : INFINITY;
}

Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& A, const std::string& factor, double scale = 0.0) {
  const double cond = condition_number(A, scale);
  if (!(cond <= max_condition))
    throw SingularityError("inverse of " + factor + " is ill-conditioned (cond " + std::to_string(cond) + ")",
                           factor, cond);
  return A.fullPivLu().inverse();
}

Eigen::MatrixXd p_matrix(const DiscretePotential& d) {
  const double n2 = d.vhat.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("build_P: ||V||_1 must be positive");
  return d.vhat * d.vhat.transpose() / n2;
}

std::vector<double> ascending_tail(const Eigen::VectorXd& desc, int count) {
  std::vector<double> out;
  for (int k = static_cast<int>(desc.size()) - 1; k >= 0 && static_cast<int>(out.size()) < count; --k)
    out.push_back(desc(k));
  return out;
}

}  // namespace

SeparationKernel resolvent_kernel(Sign sign, double eta) {
  return [sign, eta](double s) { return free_resolvent(sign, eta, s); };
}

SeparationKernel expansion_kernel(int j) {
  if (j < 0 || j > 4) throw DomainError("expansion_kernel: j must be in 0..4");
  return [j](double s) { return cplx(expansion_G(j, s), 0.0); };
}

std::vector<SectorOperator> build_M_all(Sign sign, double eta, const Potential& pot, const RadialGrid& grid,
                                        int ell_max) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw DomainError("build_M: eta must be finite and >= 0");
  const DiscretePotential d = discretize(pot, grid);
  auto ops = build_sector_operators(resolvent_kernel(sign, eta), ell_max, grid, eta);
  for (auto& op : ops) {
    Eigen::MatrixXcd m = sandwich(op.matrix, d);
    m.diagonal() += d.U.cast<cplx>();
    op.matrix = std::move(m);
  }
  return ops;
}

SectorOperator build_M(Sign sign, double eta, const Potential& pot, const RadialGrid& grid, int ell) {
  auto ops = build_M_all(sign, eta, pot, grid, ell);
  return std::move(ops[ell]);
}

SectorOperator build_vGv(int j, const Potential& pot, const RadialGrid& grid, int ell) {
  const DiscretePotential d = discretize(pot, grid);
  SectorOperator op = build_sector_operator(expansion_kernel(j), ell, grid);
  op.matrix = sandwich(op.matrix, d);
  return op;
}

SectorOperator build_T0(const Potential& pot, const RadialGrid& grid, int ell) {
  const DiscretePotential d = discretize(pot, grid);
  SectorOperator op = build_sector_operator(expansion_kernel(0), ell, grid);
  op.matrix = sandwich(op.matrix, d);
  op.matrix.diagonal() += d.U.cast<cplx>();
  return op;
}

SectorOperator build_P(const Potential& pot, const RadialGrid& grid) {
  const DiscretePotential d = discretize(pot, grid);
  SectorOperator op;
  op.ell = 0;
  op.grid = grid;
  op.matrix = p_matrix(d).cast<cplx>();
  return op;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::regular: return "regular";
    case Verdict::resonance: return "resonance";
    case Verdict::eigenvalue: return "eigenvalue";
    case Verdict::resonance_and_eigenvalue: return "resonance_and_eigenvalue";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Verdict verdict_from_string(const std::string& s) {
  for (Verdict v : {Verdict::regular, Verdict::resonance, Verdict::eigenvalue, Verdict::resonance_and_eigenvalue,
                    Verdict::indeterminate})
    if (to_string(v) == s) return v;
  throw DomainError("unknown verdict '" + s + "'");
}

int Classification::s1_dim() const {
  int n = 0;
  for (auto& s : sectors) n += static_cast<int>(s.s1.cols());
  return n;
}

int Classification::s2_dim() const {
  int n = 0;
  for (auto& s : sectors) n += static_cast<int>(s.s2.cols());
  return n;
}

Classification classify(const Potential& pot, const RadialGrid& grid, int ell_max, double tol) {
  if (!(tol > 0.0 && tol < 1.0)) throw DomainError("classify: tol must lie in (0, 1)");
  if (ell_max < 0) throw DomainError("classify: ell_max must be >= 0");
  const DiscretePotential d = discretize(pot, grid);
  const auto g0 = build_sector_operators(expansion_kernel(0), ell_max, grid);
  const auto g2 = build_sector_operators(expansion_kernel(2), ell_max, grid);

  Classification c;
  c.ell_max = ell_max;
  c.tol = tol;
  c.l1_norm = d.l1;
  bool ambiguous = false;
  for (int l = 0; l <= ell_max; ++l) {
    SectorSpectrum s;
    s.ell = l;
    Eigen::MatrixXd t0 = real_sandwich(g0[l].matrix, d);
    t0.diagonal() += d.U;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t0, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    s.sigma_max = sv(0);
    s.threshold = tol * s.sigma_max;
    s.t0_singular = ascending_tail(sv, reported_singular_values);
    std::vector<int> null_idx;
    for (int k = 0; k < sv.size(); ++k) {
      if (sv(k) < s.threshold) null_idx.push_back(k);
      if (sv(k) > s.threshold / 3.0 && sv(k) < 3.0 * s.threshold) s.ambiguous = true;
    }
    const int kept = static_cast<int>(sv.size()) - static_cast<int>(null_idx.size());
    if (null_idx.empty())
      s.gap_ratio = sv(sv.size() - 1) / s.threshold;
    else
      s.gap_ratio = kept > 0 ? sv(kept - 1) / std::max(sv(kept), 1e-300) : INFINITY;
    s.s1.resize(t0.rows(), static_cast<long>(null_idx.size()));
    for (std::size_t k = 0; k < null_idx.size(); ++k) s.s1.col(k) = svd.matrixV().col(null_idx[k]);

    if (s.s1.cols() > 0) {
      const long k1 = s.s1.cols();
      Eigen::MatrixXd t1 = Eigen::MatrixXd::Zero(k1, k1);
      if (l == 0 && !pot.is_zero()) t1 = s.s1.transpose() * p_matrix(d) * s.s1;
      Eigen::JacobiSVD<Eigen::MatrixXd> svd1(t1, Eigen::ComputeFullV);
      const Eigen::VectorXd sv1 = svd1.singularValues();
      s.t1_singular.assign(sv1.data(), sv1.data() + sv1.size());
      std::vector<int> null1;
      for (int k = 0; k < sv1.size(); ++k) {
        if (sv1(k) < tol) null1.push_back(k);
        if (sv1(k) > tol / 3.0 && sv1(k) < 3.0 * tol) s.ambiguous = true;
      }
      const int kept1 = static_cast<int>(sv1.size()) - static_cast<int>(null1.size());
      if (null1.empty())
        s.t1_gap_ratio = sv1(sv1.size() - 1) / tol;
      else
        s.t1_gap_ratio = kept1 > 0 ? sv1(kept1 - 1) / std::max(sv1(kept1), 1e-300) : INFINITY;
      s.s2.resize(t0.rows(), static_cast<long>(null1.size()));
      for (std::size_t k = 0; k < null1.size(); ++k) s.s2.col(k) = s.s1 * svd1.matrixV().col(null1[k]);
      if (s.s2.cols() > 0) {
        const Eigen::MatrixXd b = real_sandwich(g2[l].matrix, d);
        const Eigen::MatrixXd t2 = s.s2.transpose() * b * s.s2;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd2(t2);
        const Eigen::VectorXd sv2 = svd2.singularValues();
        s.t2_singular.assign(sv2.data(), sv2.data() + sv2.size());
        if (sv2(sv2.size() - 1) <= tol)
          c.diagnostics.push_back("sector " + std::to_string(l) +
                                  ": S2 v G2 v S2 is not invertible at tol, expansion of case iii unavailable");
        // v is radial, so <v, phi> vanishes by angular orthogonality outside the s-wave
        const double vn = d.vhat.norm();
        for (long k = 0; k < s.s2.cols(); ++k)
          s.v_overlap.push_back(l == 0 && vn > 0.0 ? std::abs(d.vhat.dot(s.s2.col(k))) / vn : 0.0);
      }
    }
    if (s.ambiguous) {
      ambiguous = true;
      c.diagnostics.push_back("sector " + std::to_string(l) +
                              ": singular values within a factor 3 of the null-space threshold");
    }
    c.sectors.push_back(std::move(s));
  }

  const int n1 = c.s1_dim(), n2 = c.s2_dim();
  if (ambiguous)
    c.verdict = Verdict::indeterminate;
  else if (n1 == 0)
    c.verdict = Verdict::regular;
  else if (n2 == 0)
    c.verdict = Verdict::resonance;
  else if (n2 == n1)
    c.verdict = Verdict::eigenvalue;
  else
    c.verdict = Verdict::resonance_and_eigenvalue;
  return c;
}

std::string classification_report(const Classification& c, const Potential& pot, const RadialGrid& grid) {
  using json = nlohmann::ordered_json;
  json j;
  j["schema"] = "quartic.classification";
  j["schema_version"] = 1;
  j["verdict"] = to_string(c.verdict);
  j["tol"] = c.tol;
  j["ell_max"] = c.ell_max;
  json checked = json::array();
  for (auto& s : c.sectors) checked.push_back(s.ell);
  j["sectors_checked"] = checked;
  j["note"] = "sectors above ell_max were not examined";
  j["potential"] = {{"profile", pot.name}, {"coupling", pot.coupling}, {"beta", pot.beta}};
  j["grid"] = {{"count", grid.count()}, {"r_max", grid.r_max}};
  j["l1_norm"] = c.l1_norm;
  j["s1_dim"] = c.s1_dim();
  j["s2_dim"] = c.s2_dim();
  json sectors = json::array();
  for (auto& s : c.sectors) {
    json js;
    js["ell"] = s.ell;
    js["t0_smallest_singular_values"] = s.t0_singular;
    js["sigma_max"] = s.sigma_max;
    js["threshold"] = s.threshold;
    js["gap_ratio"] = s.gap_ratio;
    js["ambiguous"] = s.ambiguous;
    js["s1_dim"] = s.s1.cols();
    js["s2_dim"] = s.s2.cols();
    js["t1_singular_values"] = s.t1_singular;
    js["t1_gap_ratio"] = s.t1_gap_ratio;
    js["t2_singular_values"] = s.t2_singular;
    js["v_overlap"] = s.v_overlap;
    json s1 = json::array();
    for (long k = 0; k < s.s1.cols(); ++k)
      s1.push_back(std::vector<double>(s.s1.col(k).data(), s.s1.col(k).data() + s.s1.rows()));
    js["s1_vectors"] = s1;
    json s2 = json::array();
    for (long k = 0; k < s.s2.cols(); ++k) {
      Eigen::VectorXd col = s.s2.col(k);
      s2.push_back(std::vector<double>(col.data(), col.data() + col.size()));
    }
    js["s2_vectors"] = s2;
    sectors.push_back(js);
  }
  j["sectors"] = sectors;
  j["diagnostics"] = c.diagnostics;
  return j.dump(2);
}

Eigen::MatrixXcd jn_invert(const Eigen::MatrixXcd& M, const Eigen::MatrixXcd& S) {
  if (M.rows() != M.cols() || S.rows() != M.rows() || S.cols() != M.cols())
    throw DomainError("jn_invert: M and S must be square of equal size");
  const Eigen::MatrixXcd A = M + S;
  const Eigen::MatrixXcd Ainv = checked_inverse(A, "M+S");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (S + S.adjoint()));
  std::vector<int> cols;
  for (int k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 0.5) cols.push_back(k);
  if (cols.empty()) return Ainv;
  Eigen::MatrixXcd Q(M.rows(), static_cast<long>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) Q.col(k) = es.eigenvectors().col(cols[k]);
  // M1 restricted to range(S), in the basis Q
  const Eigen::MatrixXcd m1 =
      Eigen::MatrixXcd::Identity(Q.cols(), Q.cols()) - Q.adjoint() * Ainv * Q;
  const Eigen::MatrixXcd m1inv = checked_inverse(m1, "M1", 1.0);
  return Ainv + Ainv * Q * m1inv * Q.adjoint() * Ainv;
}

const Eigen::MatrixXcd& ExpansionCoefficients::block(int ell, const std::string& name) const {
  auto it = blocks.find(ell);
  if (it == blocks.end() || !it->second.count(name))
    throw DomainError("expansion block '" + name + "' missing in sector " + std::to_string(ell));
  return it->second.at(name);
}

bool ExpansionCoefficients::has(int ell, const std::string& name) const {
  auto it = blocks.find(ell);
  return it != blocks.end() && it->second.count(name) > 0;
}

ExpansionCoefficients leading_coefficients(const Classification& c, const Potential& pot, const RadialGrid& grid) {
  if (c.verdict == Verdict::indeterminate)
    throw PreconditionError("leading_coefficients: classification is indeterminate");
  const DiscretePotential d = discretize(pot, grid);
  const auto g0 = build_sector_operators(expansion_kernel(0), c.ell_max, grid);
  const auto g2 = build_sector_operators(expansion_kernel(2), c.ell_max, grid);
  const cplx I(0.0, 1.0);

  ExpansionCoefficients out;
  switch (c.verdict) {
    case Verdict::regular: out.expansion_case = ExpansionCase::regular; break;
    case Verdict::resonance: out.expansion_case = ExpansionCase::resonance; break;
    default: out.expansion_case = ExpansionCase::eigenvalue; break;
  }

  for (const SectorSpectrum& s : c.sectors) {
    const int l = s.ell;
    auto& blk = out.blocks[l];
    Eigen::MatrixXcd t0 = sandwich(g0[l].matrix, d);
    t0.diagonal() += d.U.cast<cplx>();
    const long n = t0.rows();

    if (s.s1.cols() == 0) {
      const Eigen::MatrixXcd t0inv = checked_inverse(t0, "T0 sector " + std::to_string(l));
      blk["T0_inv"] = t0inv;
      if (l == 0 && !pot.is_zero()) {
        const Eigen::MatrixXcd P = p_matrix(d).cast<cplx>();
        blk["first_order_plus"] = -I * (d.l1 / (4.0 * pi)) * t0inv * P * t0inv;
      } else {
        blk["first_order_plus"] = Eigen::MatrixXcd::Zero(n, n);
      }
      continue;
    }

    if (s.s2.cols() == 0) {
      // resonance in this sector: T1 = S1 P S1 invertible on span(S1)
      const Eigen::MatrixXcd phi = s.s1.cast<cplx>();
      const Eigen::MatrixXcd S = phi * phi.adjoint();
      const Eigen::MatrixXcd P = p_matrix(d).cast<cplx>();
      const Eigen::MatrixXcd t1r = phi.adjoint() * P * phi;
      const Eigen::MatrixXcd Sigma = phi * checked_inverse(t1r, "T1") * phi.adjoint();
      const Eigen::MatrixXcd D0 = checked_inverse(t0 + S, "T0+S1");
      const Eigen::MatrixXcd B = sandwich(g2[l].matrix, d);
      const double rho = (d.vhat.cast<cplx>().dot(D0 * d.vhat.cast<cplx>())).real() / d.vhat.squaredNorm();
      const double l1 = d.l1;
      out.rho = rho;
      blk["S1"] = S;
      blk["D0"] = D0;
      blk["S1_T1inv_S1"] = Sigma;
      blk["M_minus1_plus"] = -I * (4.0 * pi / l1) * Sigma;
      const Eigen::MatrixXcd display = D0 + (16.0 * pi * pi / (l1 * l1)) * Sigma * B * Sigma -
                                       (D0 * P * Sigma + Sigma * P * D0);
      // Expanding the Jensen-Nenciu formula to order eta^0 also produces rho * S1 T1^{-1} S1
      // (from the inverse of M1); the displayed coefficient leaves it out.
      blk["M_0_plus"] = display + rho * Sigma;
      blk["M_0_display"] = display;
      continue;
    }

    // eigenvalue content in this sector
    const Eigen::MatrixXcd phi2 = s.s2.cast<cplx>();
    const Eigen::MatrixXcd B = sandwich(g2[l].matrix, d);
    const Eigen::MatrixXcd t2 = phi2.adjoint() * B * phi2;
    const Eigen::MatrixXcd a2 = phi2 * checked_inverse(t2, "S2 v G2 v S2") * phi2.adjoint();
    blk["A_minus2"] = a2;

    // least-squares surrogate for A_{-1}, A_0: eta^2 M^{-1} ~ X0 + eta X1 + eta^2 X2
    const std::vector<double> etas = log_space(1e-3, 1e-2, 12);
    std::vector<Eigen::MatrixXcd> Y;
    for (double eta : etas) {
      const SectorOperator m = build_M(Sign::plus, eta, pot, grid, l);
      Y.push_back(eta * eta * m.matrix.fullPivLu().inverse());
    }
    auto fit = [&](int terms) {
      Eigen::MatrixXd V(static_cast<long>(etas.size()), terms);
      for (std::size_t k = 0; k < etas.size(); ++k)
        for (int p = 0; p < terms; ++p) V(static_cast<long>(k), p) = std::pow(etas[k], p);
      const Eigen::MatrixXd pinv = V.completeOrthogonalDecomposition().pseudoInverse();
      std::vector<Eigen::MatrixXcd> X(terms, Eigen::MatrixXcd::Zero(n, n));
      for (int p = 0; p < terms; ++p)
        for (std::size_t k = 0; k < etas.size(); ++k) X[p] += pinv(p, static_cast<long>(k)) * Y[k];
      return X;
    };
    const auto X = fit(3);
    const auto X4 = fit(4);
    double residual = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < etas.size(); ++k) {
      const double e = etas[k];
      residual = std::max(residual, (Y[k] - X[0] - e * X[1] - e * e * X[2]).norm());
      scale = std::max(scale, Y[k].norm());
    }
    const double envelope = X4[3].norm() * std::pow(etas.back(), 3) + 1e-9 * scale;
    out.surrogate = true;
    out.fit_residual = std::max(out.fit_residual, residual);
    out.fit_envelope = std::max(out.fit_envelope, envelope);
    if (residual > 10.0 * envelope)
      throw ExpansionMismatchError("leading_coefficients: case iii fit residual exceeds 10x the O(eta^3) envelope",
                                   residual, envelope);
    blk["A_minus2_fit"] = X[0];
    blk["A_minus1_plus"] = X[1];
    blk["A_0_plus"] = X[2];
  }
  return out;
}

TuneResult resonance_tune(const std::function<Potential(double)>& family, int ell, double c_lo, double c_hi,
                          const RadialGrid& grid, double tol) {
  if (!(c_hi > c_lo)) throw BracketError("resonance_tune: need c_lo < c_hi");
  const Eigen::MatrixXd g0 = build_sector_operator(expansion_kernel(0), ell, grid).matrix.real();
  auto t0_at = [&](double c) {
    const DiscretePotential d = discretize(family(c), grid);
    Eigen::MatrixXd t0 = d.v.asDiagonal() * g0 * d.v.asDiagonal();
    t0.diagonal() += d.U;
    return t0;
  };
  auto positives = [&](double c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t0_at(c), Eigen::EigenvaluesOnly);
    return static_cast<int>((es.eigenvalues().array() > 0.0).count());
  };
  const int n_lo = positives(c_lo);
  if (positives(c_hi) == n_lo)
    throw BracketError("resonance_tune: no eigenvalue of T0 crosses zero in [c_lo, c_hi]");
  double lo = c_lo, hi = c_hi;
  TuneResult res;
  while (hi - lo > tol * std::abs(0.5 * (lo + hi)) && res.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (positives(mid) != n_lo)
      hi = mid;
    else
      lo = mid;
    ++res.iterations;
  }
  auto nearest = [&](double c, double& value, Eigen::VectorXd& vec, double& smax) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t0_at(c));
    Eigen::Index k;
    es.eigenvalues().cwiseAbs().minCoeff(&k);
    value = es.eigenvalues()(k);
    vec = es.eigenvectors().col(k);
    smax = es.eigenvalues().cwiseAbs().maxCoeff();
  };
  double v_lo, v_hi, s_lo, s_hi;
  Eigen::VectorXd e_lo, e_hi;
  nearest(lo, v_lo, e_lo, s_lo);
  nearest(hi, v_hi, e_hi, s_hi);
  if (std::abs(v_lo) <= std::abs(v_hi)) {
    res.coupling = lo, res.eigenvalue = v_lo, res.null_vector = e_lo, res.sigma_max = s_lo;
  } else {
    res.coupling = hi, res.eigenvalue = v_hi, res.null_vector = e_hi, res.sigma_max = s_hi;
  }
  return res;
}

Eigen::VectorXd zero_mode(const Eigen::VectorXd& phi, const Potential& pot, const RadialGrid& grid, int ell,
                          const std::vector<double>& radii) {
  const DiscretePotential d = discretize(pot, grid);
  Eigen::VectorXd out(static_cast<long>(radii.size()));
  const Eigen::VectorXd vphi = d.v.cwiseProduct(phi);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const Eigen::MatrixXcd a = sector_vectors(expansion_kernel(0), ell, grid, radii[k]);
    out(static_cast<long>(k)) = -(a.col(ell).real().dot(vphi));
  }
  return out;
}

}  // namespace quartic
