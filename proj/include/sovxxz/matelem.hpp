#pragma once

#include "spectrum.hpp"

namespace sovxxz {

enum class StringKind { TailMinus, HeadMinus };

inline StringKind string_kind(Side eps) { return eps == Side::Minus ? StringKind::TailMinus : StringKind::HeadMinus; }

/// Sites of the string, 0-based; n is 1-based.
inline std::vector<int> string_sites(StringKind k, int n, int n_sites) {
  if (n < 1 || n > n_sites) throw ValidationError("site index n out of range [1, N]");
  std::vector<int> s;
  if (k == StringKind::TailMinus)
    for (int a = n - 1; a < n_sites; ++a) s.push_back(a);
  else
    for (int a = 0; a < n; ++a) s.push_back(a);
  return s;
}

inline CMatrix sigma_string(const Model& m, StringKind k, int n) {
  CMatrix r = m.identity();
  for (int a : string_sites(k, n, m.n())) r = r * m.local(pauli::minus(), a);
  return r;
}

inline Eigen::Matrix2cd sy_transpose_sy(const Eigen::Matrix2cd& x) {
  return pauli::y() * x.transpose() * pauli::y();
}

namespace detail {
inline CMatrix inverse(const CMatrix& x) { return x.partialPivLu().inverse(); }

/// ∏_{a in sites} T(ζ_a^{(1)}) in the given order, bulk transfer matrix.
inline CMatrix bulk_product(const Model& m, const std::vector<int>& sites, bool invert) {
  CMatrix p = m.identity();
  for (int a : sites) {
    const CMatrix t = m.bulk_transfer(m.zeta_pt(a, 1));
    p = p * (invert ? inverse(t) : t);
  }
  return p;
}
}  // namespace detail

/// Relative residuals of the four bulk reconstructions of x at site n (1-based).
inline std::array<double, 4> bulk_reconstruct_check(const Model& m, const Eigen::Matrix2cd& x, int n) {
  if (n < 1 || n > m.n()) throw ValidationError("site index n out of range [1, N]");
  const int s = n - 1;
  const CMatrix xn = m.local(x, s);
  std::vector<int> before, after;
  for (int a = 0; a < s; ++a) before.push_back(a);
  for (int a = s + 1; a < m.n(); ++a) after.push_back(a);
  std::vector<int> before_rev(before.rbegin(), before.rend());
  const cplx z0 = m.zeta_pt(s, 0), z1 = m.zeta_pt(s, 1);
  const cplx dq = m.detq_m(m.params().xi[s]);
  const Block2 m0 = m.monodromy(z0), m1 = m.monodromy(z1);
  const CMatrix pl = detail::bulk_product(m, before, false), pli = detail::bulk_product(m, before_rev, true);
  const CMatrix pr = detail::bulk_product(m, after, false), pri = detail::bulk_product(m, after, true);
  const Eigen::Matrix2cd yx = sy_transpose_sy(x);
  const CMatrix t0 = m.bulk_transfer(z0), t1 = m.bulk_transfer(z1);
  std::array<CMatrix, 4> r = {
      pl * t1 / dq * aux_trace(m0, yx) * pli,
      pri * aux_trace(m0, yx) * t1 / dq * pr,
      pl * aux_trace(m1, x) * t0 / dq * pli,
      pri * t0 / dq * aux_trace(m1, x) * pr,
  };
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = rel_diff(r[k], xn);
  return out;
}

/// Relative residuals of the four boundary reconstructions of x at site n (1-based).
inline std::array<double, 4> boundary_reconstruct_check(const Model& m, const Eigen::Matrix2cd& x, int n) {
  if (n < 1 || n > m.n()) throw ValidationError("site index n out of range [1, N]");
  const int s = n - 1;
  const CMatrix xn = m.local(x, s);
  std::vector<int> before, after;
  for (int a = 0; a < s; ++a) before.push_back(a);
  for (int a = s + 1; a < m.n(); ++a) after.push_back(a);
  std::vector<int> before_rev(before.rbegin(), before.rend());
  const cplx xi = m.params().xi[s];
  const cplx z0 = m.zeta_pt(s, 0), z1 = m.zeta_pt(s, 1);
  const cplx dup = m.detq_u_bar(Side::Plus, xi), dum = m.detq_u_bar(Side::Minus, xi);
  const CMatrix pl = detail::bulk_product(m, before, false), pli = detail::bulk_product(m, before_rev, true);
  const CMatrix pr = detail::bulk_product(m, after, false), pri = detail::bulk_product(m, after, true);
  const Eigen::Matrix2cd yx = sy_transpose_sy(x);
  const cplx c = std::cosh(xi);
  std::array<CMatrix, 4> r = {
      c * pl * aux_trace(m.u_plus(z1), x) * m.transfer_bar(Side::Plus, z0) / dup * pli,
      c * pl * m.transfer_bar(Side::Plus, z1) / dup * aux_trace(m.u_plus(-z0), x) * pli,
      c * pri * aux_trace(m.u_minus(z0), yx) * m.transfer_bar(Side::Minus, z1) / dum * pr,
      c * pri * m.transfer_bar(Side::Minus, z0) / dum * aux_trace(m.u_minus(-z1), yx) * pr,
  };
  std::array<double, 4> out{};
  for (int k = 0; k < 4; ++k) out[k] = rel_diff(r[k], xn);
  return out;
}

struct AnnihilationEntry {
  std::string label;
  double residual;
};

/// All vanishing products X(λ)Y(μ) at the SOV points of every site.
inline std::vector<AnnihilationEntry> annihilation_checks(const Model& m) {
  struct Item {
    Side eps;
    char g1;
    int p1;
    char g2;
    int p2;
  };
  // point codes: +1 ζ^{(0)}, -1 -ζ^{(0)}, +2 ζ^{(1)}, -2 -ζ^{(1)}
  std::vector<Item> items;
  const Side mi = Side::Minus, pl = Side::Plus;
  for (int s : {1, -1}) {
    items.push_back({mi, 'A', 1, 'C', 2 * s});
    items.push_back({mi, 'A', -2, 'C', s});
    items.push_back({mi, 'D', 1, 'B', 2 * s});
    items.push_back({mi, 'D', -2, 'B', s});
    for (int s2 : {1, -1}) {
      items.push_back({mi, 'B', s, 'B', 2 * s2});
      items.push_back({mi, 'C', s, 'C', 2 * s2});
      items.push_back({pl, 'B', s, 'B', 2 * s2});
      items.push_back({pl, 'C', s, 'C', 2 * s2});
    }
    items.push_back({mi, 'B', s, 'A', -2});
    items.push_back({mi, 'B', 2 * s, 'A', 1});
    items.push_back({mi, 'C', s, 'D', -2});
    items.push_back({mi, 'C', 2 * s, 'D', 1});
    items.push_back({pl, 'A', -1, 'B', 2 * s});
    items.push_back({pl, 'A', 2, 'B', s});
    items.push_back({pl, 'D', -1, 'C', 2 * s});
    items.push_back({pl, 'D', 2, 'C', s});
    items.push_back({pl, 'B', s, 'D', 2});
    items.push_back({pl, 'B', 2 * s, 'D', -1});
    items.push_back({pl, 'C', s, 'A', 2});
    items.push_back({pl, 'C', 2 * s, 'A', -1});
  }
  for (auto e : {mi, pl}) {
    const bool minus = e == mi;
    items.push_back({e, 'A', minus ? 1 : -1, 'D', minus ? -2 : 2});
    items.push_back({e, 'A', minus ? -2 : 2, 'D', minus ? 1 : -1});
    items.push_back({e, 'D', minus ? 1 : -1, 'A', minus ? -2 : 2});
    items.push_back({e, 'D', minus ? -2 : 2, 'A', minus ? 1 : -1});
  }
  auto pname = [](int p) {
    std::string s = p < 0 ? "-z" : "z";
    return s + (std::abs(p) == 1 ? "0" : "1");
  };
  std::vector<AnnihilationEntry> out;
  for (int site = 0; site < m.n(); ++site) {
    auto point = [&](int p) {
      const cplx z = m.zeta_pt(site, std::abs(p) == 1 ? 0 : 1);
      return p < 0 ? -z : z;
    };
    for (const auto& it : items) {
      const CMatrix x = m.gen(it.eps, it.g1, point(it.p1));
      const CMatrix y = m.gen(it.eps, it.g2, point(it.p2));
      const double r = max_abs(x * y) / (max_abs(x) * max_abs(y));
      out.push_back({std::string(it.eps == mi ? "-" : "+") + ":" + it.g1 + "(" + pname(it.p1) + ")" + it.g2 + "(" +
                         pname(it.p2) + ")@" + std::to_string(site + 1),
                     r});
    }
  }
  return out;
}

/// σ⁻-string assembled from B_ε products and transfer matrices; n is 1-based.
inline CMatrix sigma_string_reconstruct(const Model& m, Side eps, int n) {
  validate_class(m.params());
  if (general_side(m.params().bcase) != eps) throw ValidationError("sigma string: boundary class mismatch");
  const auto sites = string_sites(string_kind(eps), n, m.n());
  const auto& xi = m.params().xi;
  const cplx e = m.eta();
  const int k = static_cast<int>(sites.size());
  cplx pref = 1;
  CMatrix x = m.identity();
  if (eps == Side::Minus) {
    pref = (k % 2) ? -1.0 : 1.0;
    for (int a : sites) pref *= m.bar_a(Side::Plus, m.zeta_pt(a, 1)) / m.sans_a(Side::Plus, m.zeta_pt(a, 1));
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        pref *= std::sinh(xi[sites[i]] + xi[sites[j]] - e) / std::sinh(xi[sites[i]] + xi[sites[j]]);
    for (auto it = sites.rbegin(); it != sites.rend(); ++it) x = x * m.gen(Side::Minus, 'B', m.zeta_pt(*it, 0));
    for (auto it = sites.rbegin(); it != sites.rend(); ++it)
      x = x * m.transfer(m.zeta_pt(*it, 1)) / m.detq_u_bar(Side::Minus, xi[*it]);
  } else {
    for (int a : sites) pref *= m.bar_a(Side::Minus, m.zeta_pt(a, 0)) / m.sans_d(Side::Minus, m.zeta_pt(a, 0));
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        pref *= std::sinh(xi[sites[i]] + xi[sites[j]] + e) / std::sinh(xi[sites[i]] + xi[sites[j]]);
    for (int a : sites) x = x * m.gen(Side::Plus, 'B', m.zeta_pt(a, 1));
    for (auto it = sites.rbegin(); it != sites.rend(); ++it)
      x = x * m.transfer(m.zeta_pt(*it, 0)) / m.detq_u_bar(Side::Plus, xi[*it]);
  }
  for (int a : sites) pref *= std::cosh(xi[a]);
  return pref * x;
}

inline double sigma_string_reconstruct_check(const Model& m, Side eps, int n) {
  return rel_diff(sigma_string_reconstruct(m, eps, n), sigma_string(m, string_kind(eps), n));
}

struct SigmaMatrixElementResult {
  cplx value;
  CMatrix sigma_matrix;
  cplx prefactor;
};

/// ⟨τ|σ-string|τ'⟩ in the Q gauge of build_eigenstates; n is 1-based.
inline SigmaMatrixElementResult matrix_element(const Model& m, Side eps, const SovEigenpair& left,
                                               const SovEigenpair& right, int n) {
  validate_class(m.params());
  if (general_side(m.params().bcase) != eps) throw ValidationError("matrix_element: boundary class mismatch");
  const int nn = m.n();
  const auto sites = string_sites(string_kind(eps), n, nn);
  std::vector<bool> in_s(nn, false);
  for (int a : sites) in_s[a] = true;
  const int hs = eps == Side::Minus ? 1 : 0;
  const int he = 1 - hs;
  const double sg = eps == Side::Minus ? -1.0 : 1.0;
  const int dim = nn + static_cast<int>(sites.size());
  auto qq = [&](int a, int h) { return h ? left.qbar[a] * right.q[a] : cplx(1.0); };

  CMatrix sig(dim, dim);
  for (int a = 0; a < nn; ++a)
    for (int b = 0; b < dim; ++b) {
      if (in_s[a]) {
        sig(a, b) = qq(a, hs) * std::pow(m.eta_pt(a, hs), b);
      } else {
        sig(a, b) = qq(a, 0) * std::pow(m.eta_pt(a, 0), b) + qq(a, 1) * std::pow(m.eta_pt(a, 1), b);
      }
    }
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (int b = 0; b < dim; ++b) sig(nn + i, b) = std::pow(m.eta_pt(sites[i], he), b);

  const BoundaryParams& bp = m.boundary(eps);
  const cplx e = m.eta();
  const auto& xi = m.params().xi;
  std::vector<cplx> ends;
  for (int a : sites) ends.push_back(m.eta_pt(a, he));
  cplx pref = 1.0 / vandermonde(ends);
  for (int a : sites) {
    const cplx l = m.zeta_pt(a, he);
    pref *= bp.kappa * std::exp(bp.tau) * std::sinh(2.0 * l + sg * e) / (std::pow(2.0, nn) * std::sinh(bp.zeta));
    pref *= std::cosh(xi[a]);
    if (eps == Side::Minus) {
      const cplx z1 = m.zeta_pt(a, 1);
      pref *= -m.bar_a(Side::Plus, z1) / m.sans_a(Side::Plus, z1) * tau_eval(m, right.tau, z1) /
              m.detq_u_bar(Side::Minus, xi[a]);
    } else {
      const cplx z0 = m.zeta_pt(a, 0);
      pref *= m.bar_a(Side::Minus, z0) / m.sans_d(Side::Minus, z0) * tau_eval(m, right.tau, z0) /
              m.detq_u_bar(Side::Plus, xi[a]);
    }
  }
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const cplx s = xi[sites[i]] + xi[sites[j]];
      pref *= std::sinh(s + sg * e) / std::sinh(s);
    }
  return {pref * det(sig), sig, pref};
}

}  // namespace sovxxz
