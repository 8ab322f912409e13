#pragma once

#include "algebra.hpp"

#include <Eigen/Eigenvalues>

namespace sovxxz {

struct OracleSpectrum {
  cplx lam_star;
  std::vector<cplx> eigenvalues;
  /// right eigenvectors of T
  std::vector<CVector> right;
  /// left eigenvectors, as right eigenvectors of T^t
  std::vector<CVector> left;
  double probe_residual = 0;
  double second_probe_residual = 0;
};

/// τ = (T v)_i / v_i at the largest component, cross-checked at the runner-up.
inline cplx tau_of_matrix(const CMatrix& t, const CVector& v, double tol = 1e-8) {
  const CVector tv = t * v;
  Eigen::Index i = 0, j = -1;
  v.cwiseAbs().maxCoeff(&i);
  double best = -1;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (k != i && std::abs(v[k]) > best) {
      best = std::abs(v[k]);
      j = k;
    }
  const cplx r = tv[i] / v[i];
  if (j >= 0 && std::abs(v[j]) > 1e-3 * std::abs(v[i])) {
    const cplx r2 = tv[j] / v[j];
    if (std::abs(r - r2) > tol * std::max({std::abs(r), std::abs(r2), max_abs(tv) / std::abs(v[i])}))
      throw NumError("tau_of: component ratios disagree (not an eigenvector)");
  }
  return r;
}

inline cplx tau_of(const Model& m, const CVector& v, cplx lam, double tol = 1e-8) {
  return tau_of_matrix(m.transfer(lam), v, tol);
}

inline cplx direct_matrix_element(const CVector& left, const CMatrix& op, const CVector& right) {
  return left.transpose() * (op * right);
}

/// Eigenvalues via Hessenberg-QR.
inline std::vector<cplx> qr_eigenvalues(const CMatrix& t) {
  Eigen::ComplexEigenSolver<CMatrix> es(t, false);
  if (es.info() != Eigen::Success) throw NumError("eigenvalue solver failed");
  std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), lex_less);
  return ev;
}

/// Eigenvalues via char_poly + poly_roots (reference path for small dimensions).
inline std::vector<cplx> fl_eigenvalues(const CMatrix& t) {
  const double s = std::max(max_abs(t), 1e-300);
  auto roots = poly_roots(char_poly(t / s));
  for (auto& r : roots) r *= s;
  std::sort(roots.begin(), roots.end(), lex_less);
  return roots;
}

inline OracleSpectrum diagonalize(const Model& m, cplx lam_star, std::uint64_t seed, unsigned workers = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int probe = 0; probe < 5; ++probe) {
    const CMatrix t = m.transfer(lam_star);
    const auto ev = qr_eigenvalues(t);
    double sep = std::numeric_limits<double>::infinity();
    double big = 0;
    for (auto x : ev) big = std::max(big, std::abs(x));
    for (std::size_t i = 0; i < ev.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) sep = std::min(sep, std::abs(ev[i] - ev[j]));
    if (sep < 1e-6 * std::max(big, 1e-300)) {
      lam_star = cplx(0.1 + u(rng), 0.3 + u(rng));
      continue;
    }
    OracleSpectrum o;
    o.lam_star = lam_star;
    o.eigenvalues = ev;
    o.right.resize(ev.size());
    o.left.resize(ev.size());
    const CMatrix tt = t.transpose();
    parallel_for(ev.size(), workers, [&](std::size_t k) {
      o.right[k] = inverse_iteration(t, ev[k], seed + 2 * k);
      o.left[k] = inverse_iteration(tt, ev[k], seed + 2 * k + 1);
    });
    const double tn = max_abs(t);
    const cplx mu = lam_star + cplx(0.21, -0.17);
    const CMatrix t2 = m.transfer(mu);
    const double tn2 = max_abs(t2);
    for (std::size_t k = 0; k < ev.size(); ++k) {
      const CVector& v = o.right[k];
      o.probe_residual = std::max(o.probe_residual, (t * v - ev[k] * v).norm() / tn);
      const CVector w = t2 * v;
      const cplx r = v.dot(w) / v.squaredNorm();
      o.second_probe_residual = std::max(o.second_probe_residual, (w - r * v).norm() / tn2);
    }
    return o;
  }
  throw NumError("diagonalize: persistent near-degeneracy after 5 probes");
}

}  // namespace sovxxz
