#pragma once

#include "oracle.hpp"
#include "separates.hpp"

namespace sovxxz {

struct SolverIncomplete : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// τ(λ) = fixed(λ) + sinh(2λ-η) sinh(2λ+η) Σ_b c_b cosh^b 2λ.
struct TauFunction {
  /// coefficients of τ in powers of cosh 2λ
  std::vector<cplx> c;
  /// τ(ζ_a^{(0)}) when known; evaluation then interpolates through these nodes
  std::vector<cplx> nodes;
};

inline cplx tau_fixed(const Model& m, cplx lam) {
  const cplx e = m.eta();
  return 2.0 * std::sinh(lam - e / 2.0) * std::sinh(lam + e / 2.0) * m.coth(Side::Minus) * m.coth(Side::Plus) *
             m.detq_m(kI * kPi / 2.0) +
         2.0 * std::cosh(lam - e / 2.0) * std::cosh(lam + e / 2.0) * m.parity() * m.detq_m(0.0);
}

inline cplx tau_weight(const Model& m, cplx lam) {
  return std::sinh(2.0 * lam - m.eta()) * std::sinh(2.0 * lam + m.eta());
}

/// Lagrange basis in x = cosh 2λ on the nodes cosh 2ζ_a^{(0)}.
inline std::vector<cplx> lagrange_weights(const Model& m, cplx x) {
  const int n = m.n();
  std::vector<cplx> l(n, 1.0);
  for (int a = 0; a < n; ++a) {
    const cplx xa = m.eta_pt(a, 0);
    for (int b = 0; b < n; ++b)
      if (b != a) l[a] *= (x - m.eta_pt(b, 0)) / (xa - m.eta_pt(b, 0));
  }
  return l;
}

inline cplx tau_eval(const Model& m, const TauFunction& tau, cplx lam) {
  const cplx x = std::cosh(2.0 * lam);
  cplx s = 0;
  if (static_cast<int>(tau.nodes.size()) == m.n()) {
    const auto l = lagrange_weights(m, x);
    for (int a = 0; a < m.n(); ++a) {
      const cplx z = m.zeta_pt(a, 0);
      s += l[a] * (tau.nodes[a] - tau_fixed(m, z)) / tau_weight(m, z);
    }
  } else {
    cplx p = 1;
    for (auto cb : tau.c) {
      s += cb * p;
      p *= x;
    }
  }
  return tau_fixed(m, lam) + tau_weight(m, lam) * s;
}

namespace detail {
inline CMatrix node_matrix(const Model& m, int h) {
  const int n = m.n();
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    const cplx z = m.zeta_pt(i, h);
    const cplx w = tau_weight(m, z), c2 = std::cosh(2.0 * z);
    cplx p = 1;
    for (int b = 0; b < n; ++b) {
      a(i, b) = w * p;
      p *= c2;
    }
  }
  return a;
}
}  // namespace detail

/// Inverse map from the values τ(ζ_a^{(0)}).
inline TauFunction tau_from_values(const Model& m, const std::vector<cplx>& t) {
  const int n = m.n();
  const CMatrix a = detail::node_matrix(m, 0);
  Eigen::FullPivLU<CMatrix> lu(a);
  if (!lu.isInvertible()) throw ValidationError("singular interpolation nodes");
  CVector r(n);
  for (int i = 0; i < n; ++i) r[i] = t[i] - tau_fixed(m, m.zeta_pt(i, 0));
  const CVector c = lu.solve(r);
  return TauFunction{std::vector<cplx>(c.data(), c.data() + n), t};
}

inline std::vector<cplx> node_values(const Model& m, const TauFunction& tau, int h) {
  std::vector<cplx> t(m.n());
  for (int a = 0; a < m.n(); ++a) t[a] = tau_eval(m, tau, m.zeta_pt(a, h));
  return t;
}

/// Right-hand sides r_a of τ(ζ^{(0)}) τ(ζ^{(1)}) = r_a.
inline std::vector<cplx> sov_rhs(const Model& m, Side eps) {
  std::vector<cplx> r(m.n());
  for (int a = 0; a < m.n(); ++a) {
    const cplx z0 = m.zeta_pt(a, 0), z1 = m.zeta_pt(a, 1);
    r[a] = eps == Side::Minus ? m.coef_a_minus(z1) * m.coef_a_minus(-z0) : m.coef_d_plus(-z1) * m.coef_d_plus(z0);
  }
  return r;
}

/// Relative residuals of the discrete system.
inline std::vector<double> sov_residuals(const Model& m, const TauFunction& tau, Side eps) {
  const auto r = sov_rhs(m, eps);
  const auto t0 = node_values(m, tau, 0), t1 = node_values(m, tau, 1);
  std::vector<double> out(m.n());
  for (int a = 0; a < m.n(); ++a) {
    const cplx lhs = t0[a] * t1[a];
    out[a] = std::abs(lhs - r[a]) / std::max({std::abs(r[a]), std::abs(lhs), 1e-300});
  }
  return out;
}

inline double max_of(const std::vector<double>& v) {
  double x = 0;
  for (double y : v) x = std::max(x, y);
  return x;
}

/// The system in node values: t_a (u_a + Σ_b W_ab t_b) = r_a.
struct NodeSystem {
  std::vector<cplx> r;
  CVector u;
  CMatrix w;
  Eigen::VectorXd scale;

  CVector residual(const CVector& t) const {
    const CVector l = u + w * t;
    CVector f(t.size());
    for (Eigen::Index a = 0; a < t.size(); ++a) f[a] = (t[a] * l[a] - r[a]) / (scale[a] * scale[a]);
    return f;
  }
  CMatrix jacobian(const CVector& t) const {
    const CVector l = u + w * t;
    CMatrix j(t.size(), t.size());
    for (Eigen::Index a = 0; a < t.size(); ++a) {
      j.row(a) = t[a] * w.row(a);
      j(a, a) += l[a];
      j.row(a) /= scale[a] * scale[a];
    }
    return j;
  }
};

inline NodeSystem make_node_system(const Model& m, Side eps) {
  const int n = m.n();
  NodeSystem s;
  s.r = sov_rhs(m, eps);
  s.w.resize(n, n);
  for (int a = 0; a < n; ++a) {
    const auto l = lagrange_weights(m, m.eta_pt(a, 1));
    for (int b = 0; b < n; ++b) s.w(a, b) = tau_weight(m, m.zeta_pt(a, 1)) * l[b] / tau_weight(m, m.zeta_pt(b, 0));
  }
  CVector f0(n), f1(n);
  for (int a = 0; a < n; ++a) {
    f0[a] = tau_fixed(m, m.zeta_pt(a, 0));
    f1[a] = tau_fixed(m, m.zeta_pt(a, 1));
  }
  s.u = f1 - s.w * f0;
  s.scale.resize(n);
  for (int a = 0; a < n; ++a) s.scale[a] = std::max(std::sqrt(std::abs(s.r[a])), 1e-150);
  return s;
}

namespace detail {

/// Damped Newton; returns false on failure.
inline bool newton(const NodeSystem& s, CVector& t, int max_iter = 80) {
  CVector f = s.residual(t);
  double fn = f.norm();
  for (int it = 0; it < max_iter; ++it) {
    if (!std::isfinite(fn)) return false;
    if (fn < 1e-14) break;
    Eigen::PartialPivLU<CMatrix> lu(s.jacobian(t));
    const CVector dt = lu.solve(f);
    if (!dt.allFinite()) return false;
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const CVector tn = t - step * dt;
      const CVector fnew = s.residual(tn);
      const double nn = fnew.norm();
      if (std::isfinite(nn) && nn < fn * (1 - 1e-4 * step)) {
        t = tn;
        f = fnew;
        fn = nn;
        moved = true;
        break;
      }
      step /= 2;
    }
    if (!moved) break;
  }
  // a few unconditional polishing steps
  for (int it = 0; it < 3; ++it) {
    Eigen::PartialPivLU<CMatrix> lu(s.jacobian(t));
    const CVector dt = lu.solve(s.residual(t));
    if (!dt.allFinite()) return false;
    const CVector tn = t - dt;
    if (s.residual(tn).norm() <= s.residual(t).norm()) t = tn;
  }
  const CVector l = s.u + s.w * t;
  for (Eigen::Index a = 0; a < t.size(); ++a) {
    const cplx lhs = t[a] * l[a];
    if (std::abs(lhs - s.r[a]) > 1e-10 * std::max(std::abs(s.r[a]), std::abs(lhs))) return false;
  }
  return true;
}

/// Total-degree homotopy from y_a^2 = ρ_a to the scaled target; start roots are the sign patterns.
inline bool track(const NodeSystem& s, CVector y, cplx gamma, CVector& t_out) {
  const Eigen::Index n = y.size();
  CVector rho(n), ut(n);
  CMatrix wt(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double sa = s.scale[a];
    rho[a] = s.r[a] / (sa * sa);
    ut[a] = s.u[a] / sa;
    for (Eigen::Index b = 0; b < n; ++b) wt(a, b) = s.w(a, b) * s.scale[b] / sa;
  }
  auto ftil = [&](const CVector& v) {
    const CVector l = ut + wt * v;
    CVector f(n);
    for (Eigen::Index a = 0; a < n; ++a) f[a] = v[a] * l[a] - rho[a];
    return f;
  };
  auto jtil = [&](const CVector& v) {
    const CVector l = ut + wt * v;
    CMatrix j(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      j.row(a) = v[a] * wt.row(a);
      j(a, a) += l[a];
    }
    return j;
  };
  auto gfun = [&](const CVector& v) {
    CVector g(n);
    for (Eigen::Index a = 0; a < n; ++a) g[a] = v[a] * v[a] - rho[a];
    return g;
  };
  auto h = [&](const CVector& v, double sv) { return ((1 - sv) * gamma * gfun(v) + sv * ftil(v)).eval(); };
  auto hy = [&](const CVector& v, double sv) {
    CMatrix j = sv * jtil(v);
    for (Eigen::Index a = 0; a < n; ++a) j(a, a) += (1 - sv) * gamma * 2.0 * v[a];
    return j;
  };
  auto hs = [&](const CVector& v) { return (ftil(v) - gamma * gfun(v)).eval(); };

  double sv = 0, ds = 0.01;
  int steps = 0;
  while (sv < 1.0) {
    if (++steps > 20000 || ds < 1e-12) return false;
    const double sn = std::min(1.0, sv + ds);
    const double dd = sn - sv;
    // RK4 predictor on dy/ds = -Hy^{-1} Hs
    auto deriv = [&](const CVector& v, double sx) -> CVector {
      return -hy(v, sx).partialPivLu().solve(hs(v));
    };
    const CVector k1 = deriv(y, sv);
    const CVector k2 = deriv(y + 0.5 * dd * k1, sv + 0.5 * dd);
    const CVector k3 = deriv(y + 0.5 * dd * k2, sv + 0.5 * dd);
    const CVector k4 = deriv(y + dd * k3, sn);
    CVector yp = y + dd / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    bool ok = yp.allFinite();
    for (int it = 0; ok && it < 4; ++it) {
      const CVector dy = hy(yp, sn).partialPivLu().solve(h(yp, sn));
      if (!dy.allFinite()) { ok = false; break; }
      yp -= dy;
      if (dy.norm() < 1e-11 * (1 + yp.norm())) break;
      if (it == 3) ok = false;
    }
    if (ok && (yp - y).norm() > 0.5 * (1 + y.norm())) ok = false;
    if (!ok) {
      ds /= 2;
      continue;
    }
    y = yp;
    sv = sn;
    ds = std::min(ds * 1.6, 0.05);
    if (y.norm() > 1e8) return false;
  }
  CVector t(n);
  for (Eigen::Index a = 0; a < n; ++a) t[a] = y[a] * s.scale[a];
  t_out = t;
  return newton(s, t_out);
}

inline double coef_distance(const TauFunction& x, const TauFunction& y) {
  double d = 0, sc = 1;
  for (std::size_t i = 0; i < x.c.size(); ++i) {
    d = std::max(d, std::abs(x.c[i] - y.c[i]));
    sc = std::max({sc, std::abs(x.c[i]), std::abs(y.c[i])});
  }
  return d / sc;
}

inline bool tau_less(const TauFunction& x, const TauFunction& y) {
  for (std::size_t i = 0; i < x.c.size(); ++i) {
    if (x.c[i].real() != y.c[i].real()) return x.c[i].real() < y.c[i].real();
    if (x.c[i].imag() != y.c[i].imag()) return x.c[i].imag() < y.c[i].imag();
  }
  return false;
}

}  // namespace detail

struct SolveOptions {
  unsigned workers = 1;
  bool homotopy = true;
  bool oracle_fallback = true;
  double dedupe = 1e-7;
};

struct SolveResult {
  std::vector<TauFunction> taus;
  int newton_found = 0;
  int homotopy_found = 0;
  int oracle_found = 0;
  double max_residual = 0;
};

/// All 2^N solutions of the discrete system, sorted by (re, im) of c.
inline SolveResult solve_all(const Model& m, Side eps, std::uint64_t seed, const SolveOptions& opt = {}) {
  validate_class(m.params());
  if (general_side(m.params().bcase) != eps) throw ValidationError("solve_all: boundary class mismatch");
  const int n = m.n();
  const std::size_t want = std::size_t(1) << n;
  const NodeSystem sys = make_node_system(m, eps);
  SolveResult res;
  std::vector<TauFunction> found;

  auto merge = [&](const std::vector<std::optional<CVector>>& sols) {
    int added = 0;
    for (const auto& s : sols) {
      if (!s) continue;
      TauFunction tau = tau_from_values(m, std::vector<cplx>(s->data(), s->data() + n));
      bool dup = false;
      for (const auto& f : found)
        if (detail::coef_distance(f, tau) < opt.dedupe) { dup = true; break; }
      if (!dup) {
        found.push_back(std::move(tau));
        ++added;
      }
    }
    return added;
  };

  std::vector<CVector> starts(want, CVector(n));
  for (std::size_t k = 0; k < want; ++k)
    for (int a = 0; a < n; ++a) {
      const cplx root = std::sqrt(sys.r[a]);
      starts[k][a] = ((k >> a) & 1u) ? -root : root;
    }

  {
    std::vector<std::optional<CVector>> sols(want);
    parallel_for(want, opt.workers, [&](std::size_t k) {
      CVector t = starts[k];
      if (detail::newton(sys, t)) sols[k] = t;
    });
    res.newton_found = merge(sols);
  }
  if (found.size() < want && opt.homotopy) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2 * kPi);
    const cplx gamma = std::polar(1.0, u(rng));
    std::vector<std::optional<CVector>> sols(want);
    parallel_for(want, opt.workers, [&](std::size_t k) {
      CVector y(n);
      for (int a = 0; a < n; ++a) y[a] = starts[k][a] / sys.scale[a];
      CVector t;
      if (detail::track(sys, y, gamma, t)) sols[k] = t;
    });
    res.homotopy_found = merge(sols);
  }
  if (found.size() < want && opt.oracle_fallback) {
    const OracleSpectrum o = diagonalize(m, cplx(0.123, 0.456), seed, opt.workers);
    std::vector<CMatrix> nodes(n);
    for (int a = 0; a < n; ++a) nodes[a] = m.transfer(m.zeta_pt(a, 0));
    std::vector<std::optional<CVector>> sols(want);
    parallel_for(o.right.size(), opt.workers, [&](std::size_t k) {
      CVector t(n);
      for (int a = 0; a < n; ++a) t[a] = tau_of_matrix(nodes[a], o.right[k], 1e-6);
      if (detail::newton(sys, t)) sols[k] = t;
    });
    res.oracle_found = merge(sols);
  }
  if (found.size() != want)
    throw SolverIncomplete("solve_all: found " + std::to_string(found.size()) + " of " + std::to_string(want) +
                           " solutions (newton " + std::to_string(res.newton_found) + ", homotopy " +
                           std::to_string(res.homotopy_found) + ", oracle " + std::to_string(res.oracle_found) + ")");
  std::sort(found.begin(), found.end(), detail::tau_less);
  for (const auto& f : found) res.max_residual = std::max(res.max_residual, max_of(sov_residuals(m, f, eps)));
  res.taus = std::move(found);
  return res;
}

struct SovEigenpair {
  TauFunction tau;
  /// Q(ζ_a^{(1)}) and Q̄(ζ_a^{(1)}) with Q(ζ_a^{(0)}) = Q̄(ζ_a^{(0)}) = 1
  std::vector<cplx> q, qbar;
  CVector right, left;
  double residual = 0;

  SeparateState right_factors(Side eps) const {
    SeparateState s{false, eps, {}};
    for (auto x : q) s.factors.push_back({1.0, x});
    return s;
  }
  SeparateState left_factors(Side eps) const {
    SeparateState s{true, eps, {}};
    for (auto x : qbar) s.factors.push_back({1.0, x});
    return s;
  }
};

/// Q and Q̄ ratios from the node values.
inline void q_ratios(const Model& m, Side eps, const TauFunction& tau, std::vector<cplx>& q, std::vector<cplx>& qbar) {
  const int n = m.n();
  q.resize(n);
  qbar.resize(n);
  for (int a = 0; a < n; ++a) {
    const cplx z0 = m.zeta_pt(a, 0), z1 = m.zeta_pt(a, 1);
    const cplx t0 = tau_eval(m, tau, z0);
    if (eps == Side::Minus) {
      q[a] = t0 / m.coef_a_minus(-z0);
      qbar[a] = m.alpha_factor(eps, a) * m.k_factor(eps, a) * t0 / m.coef_a_minus(z1);
    } else {
      q[a] = t0 / m.coef_d_plus(z0);
      qbar[a] = t0 / (m.alpha_factor(eps, a) * m.k_factor(eps, a) * m.coef_d_plus(-z1));
    }
  }
}

/// ‖(T - τ)v‖ / (‖v‖ max(1, max|T|)), both sides.
inline double eigen_residual(const CMatrix& t, cplx tau, const CVector& right, const CVector& left) {
  const double sc = std::max(1.0, max_abs(t));
  const double rr = (t * right - tau * right).norm() / (right.norm() * sc);
  const double rl = (t.transpose() * left - tau * left).norm() / (left.norm() * sc);
  return std::max(rr, rl);
}

struct Probe {
  cplx lam;
  CMatrix t;
};

inline std::vector<Probe> default_probes(const Model& m) {
  std::vector<Probe> p;
  for (cplx lam : {cplx(0.37, -0.21), m.zeta_pt(0, 0), m.eta() / 2.0}) p.push_back({lam, m.transfer(lam)});
  return p;
}

inline SovEigenpair build_eigenstates(const Model& m, const SovBasis& basis, const TauFunction& tau,
                                      const std::vector<Probe>& probes) {
  SovEigenpair e;
  e.tau = tau;
  q_ratios(m, basis.eps, tau, e.q, e.qbar);
  e.right = assemble(m, basis, e.right_factors(basis.eps));
  e.left = assemble(m, basis, e.left_factors(basis.eps));
  for (const auto& p : probes)
    e.residual = std::max(e.residual, eigen_residual(p.t, tau_eval(m, tau, p.lam), e.right, e.left));
  return e;
}

inline std::vector<SovEigenpair> build_all(const Model& m, const SovBasis& basis, const std::vector<TauFunction>& taus,
                                           unsigned workers = 1) {
  const auto probes = default_probes(m);
  std::vector<SovEigenpair> out(taus.size());
  parallel_for(taus.size(), workers, [&](std::size_t k) { out[k] = build_eigenstates(m, basis, taus[k], probes); });
  return out;
}

/// max|Σ |τ⟩⟨τ| / ⟨τ|τ⟩ - Id|.
inline double completeness_residual(const Model& m, const std::vector<SovEigenpair>& pairs) {
  CMatrix s = CMatrix::Zero(m.dim(), m.dim());
  for (const auto& p : pairs) {
    const cplx nrm = p.left.transpose() * p.right;
    s += p.right * p.left.transpose() / nrm;
  }
  return max_abs(s - m.identity());
}

/// Discrete Baxter equations for Ψ(h) = ⟨ε,h|τ⟩ read off the state.
inline double baxter_residual(const Model& m, const SovBasis& basis, const SovEigenpair& e) {
  const int n = m.n();
  std::vector<cplx> psi(basis.left.size());
  for (unsigned idx = 0; idx < psi.size(); ++idx) psi[idx] = basis.left[idx].transpose() * e.right;
  const auto t0 = node_values(m, e.tau, 0), t1 = node_values(m, e.tau, 1);
  double worst = 0;
  for (unsigned idx = 0; idx < psi.size(); ++idx)
    for (int a = 0; a < n; ++a) {
      const cplx z0 = m.zeta_pt(a, 0), z1 = m.zeta_pt(a, 1);
      cplx lhs, rhs;
      if (h_bit(idx, a) == 0) {
        lhs = t0[a] * psi[idx];
        rhs = (basis.eps == Side::Minus ? m.coef_a_minus(-z0) : m.coef_d_plus(z0)) * psi[idx | (1u << a)];
      } else {
        lhs = t1[a] * psi[idx];
        rhs = (basis.eps == Side::Minus ? m.coef_a_minus(z1) : m.coef_d_plus(-z1)) * psi[idx & ~(1u << a)];
      }
      const double sc = std::max(std::abs(lhs), std::abs(rhs));
      if (sc > 0) worst = std::max(worst, std::abs(lhs - rhs) / sc);
    }
  return worst;
}

struct OracleMatch {
  /// index[k]: SOV solution matched to oracle eigenvector k
  std::vector<std::size_t> index;
  std::vector<double> distance;
  double worst = 0;
};

/// Greedy node-value matching of oracle eigenvectors to SOV solutions over all 2N SOV points.
inline OracleMatch match_oracle(const Model& m, const std::vector<TauFunction>& taus, const OracleSpectrum& o,
                                unsigned workers = 1) {
  const int n = m.n();
  std::vector<cplx> pts;
  for (int a = 0; a < n; ++a)
    for (int h = 0; h < 2; ++h) pts.push_back(m.zeta_pt(a, h));
  std::vector<CMatrix> ts(pts.size());
  parallel_for(pts.size(), workers, [&](std::size_t k) { ts[k] = m.transfer(pts[k]); });
  std::vector<std::vector<cplx>> ov(o.right.size(), std::vector<cplx>(pts.size()));
  parallel_for(o.right.size(), workers, [&](std::size_t k) {
    for (std::size_t p = 0; p < pts.size(); ++p) ov[k][p] = tau_of_matrix(ts[p], o.right[k], 1e-6);
  });
  std::vector<std::vector<cplx>> sv(taus.size(), std::vector<cplx>(pts.size()));
  for (std::size_t k = 0; k < taus.size(); ++k)
    for (std::size_t p = 0; p < pts.size(); ++p) sv[k][p] = tau_eval(m, taus[k], pts[p]);
  OracleMatch res;
  std::vector<bool> used(taus.size(), false);
  for (std::size_t k = 0; k < ov.size(); ++k) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    for (std::size_t j = 0; j < taus.size(); ++j) {
      if (used[j]) continue;
      double d = 0;
      for (std::size_t p = 0; p < pts.size(); ++p) d = std::max(d, rel_diff(sv[j][p], ov[k][p]));
      if (d < best) {
        best = d;
        bi = j;
      }
    }
    if (!taus.empty()) used[bi] = true;
    res.index.push_back(bi);
    res.distance.push_back(best);
    res.worst = std::max(res.worst, best);
  }
  return res;
}

/// Orthogonality certificate for two eigenpairs.
inline double orthogonality_certificate(const Model& m, Side eps, const SovEigenpair& l, const SovEigenpair& r) {
  std::vector<cplx> dc(m.n());
  for (int b = 0; b < m.n(); ++b) dc[b] = l.tau.c[b] - r.tau.c[b];
  return orthogonality_certificate(m, l.left_factors(eps), r.right_factors(eps), dc);
}

}  // namespace sovxxz
