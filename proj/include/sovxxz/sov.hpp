#pragma once

#include "algebra.hpp"

#include <Eigen/SVD>

namespace sovxxz {

/// h ∈ {0,1}^N packed as index = Σ_a 2^a h_a (site a = 0..N-1).
inline int h_bit(unsigned idx, int a) { return (idx >> a) & 1u; }

inline std::vector<int> h_vector(unsigned idx, int n) {
  std::vector<int> h(n);
  for (int a = 0; a < n; ++a) h[a] = h_bit(idx, a);
  return h;
}

inline unsigned h_index(const std::vector<int>& h) {
  unsigned idx = 0;
  for (std::size_t a = 0; a < h.size(); ++a) idx |= unsigned(h[a] & 1) << a;
  return idx;
}

/// ∏_{b<a} (x_a - x_b)
inline cplx vandermonde(const std::vector<cplx>& x) {
  cplx v = 1;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < a; ++b) v *= x[a] - x[b];
  return v;
}

inline std::vector<cplx> eta_points(const Model& m, unsigned idx) {
  std::vector<cplx> x(m.n());
  for (int a = 0; a < m.n(); ++a) x[a] = m.eta_pt(a, h_bit(idx, a));
  return x;
}

/// SOV measure μ(h) = ∏_{b<a}(η_a^{(h_a)} - η_b^{(h_b)}).
inline cplx measure(const Model& m, unsigned idx) { return vandermonde(eta_points(m, idx)); }

/// Checks that the 2N values η_a^{(h)} are pairwise distinct.
inline void check_sov_points(const Model& m, double margin = 1e-8) {
  std::vector<cplx> all;
  for (int a = 0; a < m.n(); ++a)
    for (int h = 0; h < 2; ++h) all.push_back(m.eta_pt(a, h));
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(all[i] - all[j]) < margin) throw ValidationError("SOV points eta_a^(h) not distinct");
}

/// b_{ε,h}(λ) in product form.
inline cplx b_eigenvalue(const Model& m, Side eps, unsigned idx, cplx lam) {
  const BoundaryParams& b = m.boundary(eps);
  auto ah = [&](cplx x) {
    cplx r = 1;
    for (int a = 0; a < m.n(); ++a) r *= std::sinh(x - m.zeta_pt(a, h_bit(idx, a)));
    return r;
  };
  return m.parity() * b.kappa * std::exp(b.tau) * std::sinh(2.0 * lam + double(sgn(eps)) * m.eta()) /
         std::sinh(b.zeta) * ah(lam) * ah(-lam);
}

/// b_{ε,h}(λ) in cosh-2λ product form.
inline cplx b_eigenvalue_cosh(const Model& m, Side eps, unsigned idx, cplx lam) {
  const BoundaryParams& b = m.boundary(eps);
  cplx r = b.kappa * std::exp(b.tau) * std::sinh(2.0 * lam + double(sgn(eps)) * m.eta()) /
           (std::pow(2.0, m.n()) * std::sinh(b.zeta));
  for (int a = 0; a < m.n(); ++a) r *= std::cosh(2.0 * lam) - m.eta_pt(a, h_bit(idx, a));
  return r;
}

struct SovBasis {
  Side eps = Side::Minus;
  int n = 0;
  /// left[idx] is the covector ⟨ε,h| stored as a column of coefficients.
  std::vector<CVector> left;
  std::vector<CVector> right;
  cplx norm = 1;
  std::vector<cplx> k;
};

/// ⟨0| (all up) and |0̄⟩ (all down).
inline CVector ref_up(const Model& m) {
  CVector v = CVector::Zero(m.dim());
  v[0] = 1;
  return v;
}
inline CVector ref_down(const Model& m) {
  CVector v = CVector::Zero(m.dim());
  v[m.dim() - 1] = 1;
  return v;
}

/// Left/right B_ε-eigenbasis.
inline SovBasis build_basis(const Model& m, Side eps) {
  validate_class(m.params());
  if (general_side(m.params().bcase) != eps)
    throw ValidationError("basis side does not match the general boundary");
  check_sov_points(m);
  const int n = m.n();
  const unsigned count = 1u << n;
  SovBasis basis;
  basis.eps = eps;
  basis.n = n;
  std::vector<CMatrix> lop(n), rop(n);
  for (int a = 0; a < n; ++a) {
    basis.k.push_back(m.k_factor(eps, a));
    if (eps == Side::Minus) {
      const cplx z0 = m.zeta_pt(a, 0), z1 = m.zeta_pt(a, 1);
      lop[a] = m.gen(Side::Minus, 'A', -z0) / m.sans_A_minus(-z0);
      rop[a] = m.gen(Side::Minus, 'D', z1) / (basis.k[a] * m.sans_A_minus(-z0));
    } else {
      const cplx z0 = m.zeta_pt(a, 0), z1 = m.zeta_pt(a, 1);
      lop[a] = m.gen(Side::Plus, 'D', -z1) / m.sans_D_plus(-z1);
      rop[a] = m.gen(Side::Plus, 'A', z0) / (basis.k[a] * m.sans_D_plus(-z1));
    }
  }
  const int lon = eps == Side::Minus ? 1 : 0;
  basis.left.resize(count);
  basis.right.resize(count);
  for (unsigned idx = 0; idx < count; ++idx) {
    CVector l = ref_up(m), r = ref_down(m);
    for (int a = 0; a < n; ++a) {
      if (h_bit(idx, a) == lon) l = (l.transpose() * lop[a]).transpose();
      if (h_bit(idx, a) != lon) r = rop[a] * r;
    }
    basis.left[idx] = std::move(l);
    basis.right[idx] = std::move(r);
  }
  const unsigned ref = eps == Side::Minus ? 0u : count - 1;
  const cplx pair = basis.left[ref].transpose() * basis.right[ref];
  const cplx n2 = pair * measure(m, ref);
  if (std::abs(pair) < 1e-300 || !finite(n2)) throw ValidationError("vanishing gauge normalization");
  basis.norm = std::sqrt(n2);
  for (unsigned idx = 0; idx < count; ++idx) {
    basis.left[idx] /= basis.norm;
    basis.right[idx] /= basis.norm;
  }
  return basis;
}

/// Columns = right states, rows = left states.
inline CMatrix right_matrix(const SovBasis& b) {
  CMatrix r(b.right[0].size(), b.right.size());
  for (std::size_t i = 0; i < b.right.size(); ++i) r.col(i) = b.right[i];
  return r;
}
inline CMatrix left_matrix(const SovBasis& b) {
  CMatrix r(b.left.size(), b.left[0].size());
  for (std::size_t i = 0; i < b.left.size(); ++i) r.row(i) = b.left[i].transpose();
  return r;
}

/// max over h of relative residual of ⟨h|B = b_h ⟨h| and B|h⟩ = b_h |h⟩.
inline double b_eigen_residual(const Model& m, const SovBasis& b, cplx lam) {
  const CMatrix bop = m.gen(b.eps, 'B', lam);
  double worst = 0;
  for (unsigned idx = 0; idx < b.left.size(); ++idx) {
    const cplx ev = b_eigenvalue(m, b.eps, idx, lam);
    const CVector l = b.left[idx], r = b.right[idx];
    const double sc = max_abs(bop);
    worst = std::max(worst, max_abs((l.transpose() * bop).transpose() - ev * l) / (sc * max_abs(l)));
    worst = std::max(worst, max_abs(bop * r - ev * r) / (sc * max_abs(r)));
  }
  return worst;
}

/// Deviation of the pairing matrix from diag(1/μ(h)): diagonal relative to 1/μ(h), off-diagonal relative to ‖⟨h|‖‖|h'⟩‖.
inline double pairing_residual(const Model& m, const SovBasis& b) {
  const CMatrix g = left_matrix(b) * right_matrix(b);
  double worst = 0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (i == j) {
        const cplx e = 1.0 / measure(m, unsigned(i));
        worst = std::max(worst, std::abs(g(i, i) - e) / std::abs(e));
      } else {
        worst = std::max(worst, std::abs(g(i, j)) / (b.left[i].norm() * b.right[j].norm()));
      }
    }
  return worst;
}

/// max|Σ_h μ(h)|h⟩⟨h| - Id|.
inline double identity_resolution(const Model& m, const SovBasis& b) {
  CMatrix s = CMatrix::Zero(m.dim(), m.dim());
  for (unsigned idx = 0; idx < b.left.size(); ++idx)
    s += measure(m, idx) * b.right[idx] * b.left[idx].transpose();
  return max_abs(s - m.identity());
}

/// 2-norm condition number of the right basis with unit columns.
inline double basis_condition(const SovBasis& b) {
  CMatrix r = right_matrix(b);
  for (Eigen::Index i = 0; i < r.cols(); ++i) r.col(i).normalize();
  const Eigen::JacobiSVD<CMatrix> svd(r);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

enum class Action { LeftAMinus, RightDMinus, LeftDPlus, RightAPlus };

inline Side action_side(Action g) {
  return (g == Action::LeftAMinus || g == Action::RightDMinus) ? Side::Minus : Side::Plus;
}
inline bool action_left(Action g) { return g == Action::LeftAMinus || g == Action::LeftDPlus; }
inline char action_gen(Action g) {
  return (g == Action::LeftAMinus || g == Action::RightAPlus) ? 'A' : 'D';
}

/// Interpolated action of A_-/D_- (minus) or D_+/A_+ (plus) on a basis state.
inline CVector interpolated_action(const Model& m, const SovBasis& basis, Action g, unsigned idx, cplx lam) {
  const Side eps = action_side(g);
  if (eps != basis.eps) throw ValidationError("interpolated_action: basis side mismatch");
  const bool left = action_left(g);
  const auto& states = left ? basis.left : basis.right;
  const int n = m.n();
  const cplx e = m.eta();
  const double ps = eps == Side::Minus ? 1.0 : -1.0;
  const int dirn = eps == Side::Minus ? -1 : 1;
  auto F = [&](cplx x) { return eps == Side::Minus ? m.sans_A_minus(x) : m.sans_D_plus(x); };

  std::vector<cplx> z(2 * n);
  for (int a = 0; a < n; ++a) {
    z[a] = m.zeta_pt(a, h_bit(idx, a));
    z[a + n] = -z[a];
  }
  const cplx c2l = std::cosh(2.0 * lam);
  CVector out = CVector::Zero(m.dim());
  for (int a = 0; a < 2 * n; ++a) {
    const int site = a % n;
    const int shifted = h_bit(idx, site) + (a < n ? dirn : -dirn);
    if (shifted < 0 || shifted > 1) continue;
    const cplx za = z[a];
    cplx w = std::sinh(2.0 * lam - ps * e) * std::sinh(lam + za) /
             (std::sinh(2.0 * za - ps * e) * std::sinh(2.0 * za));
    for (int b = 0; b < n; ++b)
      if (b != site) w *= (c2l - std::cosh(2.0 * z[b])) / (std::cosh(2.0 * za) - std::cosh(2.0 * z[b]));
    cplx coef;
    if (left) {
      coef = F(za);
    } else {
      const double phi = a < n ? 1.0 : -1.0;
      coef = std::pow(m.k_factor(eps, site), phi) * F(za - 2.0 * phi * m.params().xi[site]);
    }
    const unsigned target = shifted ? (idx | (1u << site)) : (idx & ~(1u << site));
    out += w * coef * states[target];
  }
  cplx f0 = 1, f1 = 1;
  for (int b = 0; b < n; ++b) {
    const cplx cz = std::cosh(2.0 * z[b]);
    f0 *= (c2l - cz) / (std::cosh(e) - cz);
    f1 *= (c2l - cz) / (std::cosh(e) + cz);
  }
  const double s = m.parity();
  const double s1 = (g == Action::RightDMinus || g == Action::LeftDPlus) ? -s : s;
  const cplx fx = std::cosh(lam - ps * e / 2.0), fy = std::sinh(lam - ps * e / 2.0);
  out += (s * m.detq_m(0.0) * fx * f0 + s1 * m.coth(eps) * m.detq_m(kI * kPi / 2.0) * fy * f1) * states[idx];
  return out;
}

/// Direct action for comparison.
inline CVector direct_action(const Model& m, const SovBasis& basis, Action g, unsigned idx, cplx lam) {
  const CMatrix op = m.gen(action_side(g), action_gen(g), lam);
  if (action_left(g)) return (basis.left[idx].transpose() * op).transpose();
  return op * basis.right[idx];
}

}  // namespace sovxxz
