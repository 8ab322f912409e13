#pragma once

#include "numkit.hpp"

#include <array>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace sovxxz {

enum class Case { Minus, Plus };
/// Boundary side, also used for the ε label of the reflection-algebra generators.
enum class Side { Minus, Plus };

inline int sgn(Side s) { return s == Side::Plus ? 1 : -1; }
inline Side opposite(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }
inline Side general_side(Case c) { return c == Case::Minus ? Side::Minus : Side::Plus; }
inline const char* to_string(Case c) { return c == Case::Minus ? "minus" : "plus"; }

struct BoundaryParams {
  cplx zeta{0.5, 0.0};
  cplx kappa{0.0, 0.0};
  cplx tau{0.0, 0.0};
};

struct ModelParams {
  int n_sites = 1;
  cplx eta{0.5, 0.5};
  BoundaryParams minus;
  BoundaryParams plus;
  std::vector<cplx> xi;
  Case bcase = Case::Minus;
  /// Triangular c-entry on the constrained side.
  std::optional<cplx> tri_c;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string fmt(cplx z) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << z.real() << "," << z.imag() << ")";
  return os.str();
}
}  // namespace detail

/// Representation guards; `margin` bounds every guarded quantity away from zero.
inline void validate_guards(const ModelParams& p, double margin = 1e-8, bool homogeneous = false) {
  if (p.n_sites < 1 || p.n_sites > 8) throw ValidationError("n_sites must lie in [1, 8]");
  if (static_cast<int>(p.xi.size()) != p.n_sites)
    throw ValidationError("xi must hold n_sites entries");
  auto all_finite = finite(p.eta) && finite(p.minus.zeta) && finite(p.minus.kappa) &&
                    finite(p.minus.tau) && finite(p.plus.zeta) && finite(p.plus.kappa) &&
                    finite(p.plus.tau);
  for (auto x : p.xi) all_finite = all_finite && finite(x);
  if (p.tri_c) all_finite = all_finite && finite(*p.tri_c);
  if (!all_finite) throw ValidationError("non-finite parameter");
  if (std::abs(std::sinh(p.eta)) < margin) throw ValidationError("sinh(eta) vanishes");
  if (std::abs(std::sinh(p.minus.zeta)) < margin) throw ValidationError("sinh(zeta_minus) vanishes");
  if (std::abs(std::sinh(p.plus.zeta)) < margin) throw ValidationError("sinh(zeta_plus) vanishes");
  if (homogeneous) return;
  const cplx eta = p.eta;
  const int n = p.n_sites;
  for (int a = 0; a < n; ++a) {
    const cplx x = p.xi[a];
    if (std::abs(std::sinh(2.0 * x)) < margin)
      throw ValidationError("xi_" + std::to_string(a + 1) + " violates sinh(2 xi) != 0");
    for (int r : {-2, -1, 1, 2})
      if (std::abs(std::sinh(2.0 * x + double(r) * eta)) < margin)
        throw ValidationError("xi_" + std::to_string(a + 1) + " violates 2 xi != " +
                              std::to_string(-r) + " eta");
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int r : {-1, 0, 1}) {
        if (std::abs(std::sinh(p.xi[a] - p.xi[b] - double(r) * eta)) < margin)
          throw ValidationError("E-SOV violated for (a,b,r)=(" + std::to_string(a + 1) + "," +
                                std::to_string(b + 1) + "," + std::to_string(r) + ")");
        if (std::abs(std::sinh(p.xi[a] + p.xi[b] + double(r) * eta)) < margin)
          throw ValidationError("SOV points coincide: xi_" + std::to_string(a + 1) + " + xi_" +
                                std::to_string(b + 1) + " = " + std::to_string(-r) + " eta");
      }
}

/// Boundary class: the general side needs kappa != 0, the constrained side must be
/// diagonal or triangular.
inline void validate_class(const ModelParams& p, double margin = 1e-8) {
  const BoundaryParams& gen = p.bcase == Case::Minus ? p.minus : p.plus;
  const BoundaryParams& con = p.bcase == Case::Minus ? p.plus : p.minus;
  const char* eps = p.bcase == Case::Minus ? "minus" : "plus";
  if (std::abs(gen.kappa) < margin)
    throw ValidationError(std::string("b") + eps + " vanishes: kappa on the general side is 0");
  if (!p.tri_c && std::abs(con.kappa) != 0.0)
    throw ValidationError("boundary class mismatch: constrained side has kappa " +
                          detail::fmt(con.kappa) + " and no tri_c");
}

inline void validate(const ModelParams& p, double margin = 1e-8) {
  validate_guards(p, margin);
  validate_class(p, margin);
}

/// 2x2 operator-valued matrix, blocks row-major.
struct Block2 {
  std::array<CMatrix, 4> m;
  CMatrix& operator()(int i, int j) { return m[2 * i + j]; }
  const CMatrix& operator()(int i, int j) const { return m[2 * i + j]; }
  CMatrix full() const {
    const auto d = m[0].rows();
    CMatrix r(2 * d, 2 * d);
    r << m[0], m[1], m[2], m[3];
    return r;
  }
};

inline Block2 operator*(const Block2& x, const Block2& y) {
  Block2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
  return r;
}

inline Block2 operator*(const Block2& x, const Eigen::Matrix2cd& k) {
  Block2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * k(0, j) + x(i, 1) * k(1, j);
  return r;
}

inline Block2 aux_transpose(const Block2& x) {
  Block2 r;
  r(0, 0) = x(0, 0);
  r(0, 1) = x(1, 0);
  r(1, 0) = x(0, 1);
  r(1, 1) = x(1, 1);
  return r;
}

/// tr_0 { U(λ) x_0 } for a scalar 2x2 x.
inline CMatrix aux_trace(const Block2& u, const Eigen::Matrix2cd& x) {
  return u(0, 0) * x(0, 0) + u(0, 1) * x(1, 0) + u(1, 0) * x(0, 1) + u(1, 1) * x(1, 1);
}

struct Gens {
  CMatrix A, B, C, D;
  const CMatrix& get(char g) const {
    switch (g) {
      case 'A': return A;
      case 'B': return B;
      case 'C': return C;
      default: return D;
    }
  }
};

namespace pauli {
inline Eigen::Matrix2cd id() { return Eigen::Matrix2cd::Identity(); }
inline Eigen::Matrix2cd x() { Eigen::Matrix2cd m; m << 0, 1, 1, 0; return m; }
inline Eigen::Matrix2cd y() { Eigen::Matrix2cd m; m << 0, -kI, kI, 0; return m; }
inline Eigen::Matrix2cd z() { Eigen::Matrix2cd m; m << 1, 0, 0, -1; return m; }
/// |down><up| with local index 0 = up
inline Eigen::Matrix2cd minus() { Eigen::Matrix2cd m; m << 0, 0, 1, 0; return m; }
inline Eigen::Matrix2cd plus() { Eigen::Matrix2cd m; m << 0, 1, 0, 0; return m; }
inline Eigen::Matrix2cd up() { Eigen::Matrix2cd m; m << 1, 0, 0, 0; return m; }
inline Eigen::Matrix2cd down() { Eigen::Matrix2cd m; m << 0, 0, 0, 1; return m; }
}  // namespace pauli

/// u at `site` (0-based, site 0 most significant), identity elsewhere.
inline CMatrix site_op(const Eigen::Matrix2cd& u, int site, int n_sites) {
  const Eigen::Index dim = Eigen::Index(1) << n_sites;
  const Eigen::Index mask = Eigen::Index(1) << (n_sites - 1 - site);
  CMatrix r = CMatrix::Zero(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    int bj = (j & mask) ? 1 : 0;
    for (int bi = 0; bi < 2; ++bi) {
      Eigen::Index i = bi ? (j | mask) : (j & ~mask);
      r(i, j) = u(bi, bj);
    }
  }
  return r;
}

/// X * site_op(u, site) in O(dim^2).
inline CMatrix right_local(const CMatrix& x, const Eigen::Matrix2cd& u, int site, int n_sites) {
  const Eigen::Index dim = x.cols();
  const Eigen::Index mask = Eigen::Index(1) << (n_sites - 1 - site);
  CMatrix y(x.rows(), dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    const int bj = (j & mask) ? 1 : 0;
    const Eigen::Index j0 = j & ~mask, j1 = j | mask;
    y.col(j) = x.col(j0) * u(0, bj) + x.col(j1) * u(1, bj);
  }
  return y;
}

inline CMatrix r_matrix(cplx lam, cplx eta) {
  CMatrix r = CMatrix::Zero(4, 4);
  r(0, 0) = r(3, 3) = std::sinh(lam + eta);
  r(1, 1) = r(2, 2) = std::sinh(lam);
  r(1, 2) = r(2, 1) = std::sinh(eta);
  return r;
}

inline double yang_baxter_residual(cplx lam, cplx mu, cplx eta) {
  const CMatrix i2 = CMatrix::Identity(2, 2);
  const CMatrix r12 = kron(r_matrix(lam - mu, eta), i2);
  const CMatrix r23 = kron(i2, r_matrix(mu, eta));
  CMatrix p23 = kron(i2, r_matrix(0.0, eta) / std::sinh(eta));
  const CMatrix r13 = p23 * kron(r_matrix(lam, eta), i2) * p23;
  return rel_diff(r12 * r13 * r23, r23 * r13 * r12);
}

namespace detail {
/// u ⊗ 1 and 1 ⊗ u in aux1 ⊗ aux2 ⊗ quantum.
inline CMatrix embed_aux1(const Block2& u) {
  const auto d = u.m[0].rows();
  CMatrix r = CMatrix::Zero(4 * d, 4 * d);
  for (int i1 = 0; i1 < 2; ++i1)
    for (int j1 = 0; j1 < 2; ++j1)
      for (int i2 = 0; i2 < 2; ++i2) r.block((2 * i1 + i2) * d, (2 * j1 + i2) * d, d, d) = u(i1, j1);
  return r;
}
inline CMatrix embed_aux2(const Block2& u) {
  const auto d = u.m[0].rows();
  CMatrix r = CMatrix::Zero(4 * d, 4 * d);
  for (int i1 = 0; i1 < 2; ++i1)
    for (int i2 = 0; i2 < 2; ++i2)
      for (int j2 = 0; j2 < 2; ++j2) r.block((2 * i1 + i2) * d, (2 * i1 + j2) * d, d, d) = u(i2, j2);
  return r;
}
}  // namespace detail

/// R(λ-μ) U1(λ) R(λ+μ-η) U2(μ) = U2(μ) R(λ+μ-η) U1(λ) R(λ-μ), relative residual.
inline double reflection_residual(const std::function<Block2(cplx)>& u, cplx lam, cplx mu, cplx eta) {
  const Block2 ul = u(lam), um = u(mu);
  const auto d = ul.m[0].rows();
  const CMatrix id = CMatrix::Identity(d, d);
  const CMatrix ra = kron(r_matrix(lam - mu, eta), id);
  const CMatrix rb = kron(r_matrix(lam + mu - eta, eta), id);
  const CMatrix u1 = detail::embed_aux1(ul), u2 = detail::embed_aux2(um);
  return rel_diff(ra * u1 * rb * u2, u2 * rb * u1 * ra);
}

inline Block2 scalar_block(const Eigen::Matrix2cd& k) {
  Block2 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = CMatrix::Constant(1, 1, k(i, j));
  return r;
}

class Model {
 public:
  explicit Model(ModelParams p, bool homogeneous = false)
      : p_(std::move(p)), cache_(std::make_shared<Cache>()) {
    validate_guards(p_, 1e-8, homogeneous);
    dim_ = Eigen::Index(1) << p_.n_sites;
  }

  const ModelParams& params() const { return p_; }
  int n() const { return p_.n_sites; }
  Eigen::Index dim() const { return dim_; }
  cplx eta() const { return p_.eta; }
  const BoundaryParams& boundary(Side s) const { return s == Side::Minus ? p_.minus : p_.plus; }
  CMatrix identity() const { return CMatrix::Identity(dim_, dim_); }

  /// Same model with ζ on one side replaced.
  Model with_zeta(Side s, cplx zeta) const {
    ModelParams q = p_;
    (s == Side::Minus ? q.minus : q.plus).zeta = zeta;
    return Model(q, true);
  }

  // ---- operators

  /// M(λ) = L_N(λ) ... L_1(λ), memoized on the bits of λ.
  Block2 monodromy(cplx lam) const {
    const Key key = key_of(lam);
    {
      std::lock_guard<std::mutex> lk(cache_->mu);
      auto it = cache_->m.find(key);
      if (it != cache_->m.end()) return it->second;
    }
    Block2 x;
    x(0, 0) = identity();
    x(0, 1) = CMatrix::Zero(dim_, dim_);
    x(1, 0) = CMatrix::Zero(dim_, dim_);
    x(1, 1) = identity();
    const cplx eta = p_.eta, se = std::sinh(eta);
    for (int n = p_.n_sites - 1; n >= 0; --n) {
      const cplx l = lam - p_.xi[n] - eta / 2.0;
      Eigen::Matrix2cd la, lb, lc, ld;
      la << std::sinh(l + eta), 0, 0, std::sinh(l);
      ld << std::sinh(l), 0, 0, std::sinh(l + eta);
      lb = se * pauli::minus();
      lc = se * pauli::plus();
      Block2 y;
      for (int i = 0; i < 2; ++i) {
        y(i, 0) = right_local(x(i, 0), la, n, p_.n_sites) + right_local(x(i, 1), lc, n, p_.n_sites);
        y(i, 1) = right_local(x(i, 0), lb, n, p_.n_sites) + right_local(x(i, 1), ld, n, p_.n_sites);
      }
      x = std::move(y);
    }
    {
      std::lock_guard<std::mutex> lk(cache_->mu);
      if (cache_->m.size() > 64) cache_->m.clear();
      cache_->m.emplace(key, x);
    }
    return x;
  }

  /// M̂(λ) = (-1)^N σ^y M^{t0}(-λ) σ^y.
  Block2 monodromy_hat(cplx lam) const {
    const Block2 x = monodromy(-lam);
    const double s = parity();
    Block2 r;
    r(0, 0) = s * x(1, 1);
    r(0, 1) = -s * x(0, 1);
    r(1, 0) = -s * x(1, 0);
    r(1, 1) = s * x(0, 0);
    return r;
  }

  /// Bulk transfer matrix A(λ) + D(λ).
  CMatrix bulk_transfer(cplx lam) const {
    const Block2 x = monodromy(lam);
    return x(0, 0) + x(1, 1);
  }

  Eigen::Matrix2cd k_matrix(Side s, cplx lam) const {
    const BoundaryParams& b = boundary(s);
    const cplx l = lam + double(sgn(s)) * p_.eta / 2.0;
    const cplx sz = std::sinh(b.zeta);
    Eigen::Matrix2cd k;
    k(0, 0) = std::sinh(l + b.zeta) / sz;
    k(1, 1) = std::sinh(b.zeta - l) / sz;
    k(0, 1) = b.kappa * std::exp(b.tau) * std::sinh(2.0 * l) / sz;
    k(1, 0) = b.kappa * std::exp(-b.tau) * std::sinh(2.0 * l) / sz;
    if (p_.tri_c && s != general_side(p_.bcase)) {
      k(0, 1) = 0;
      k(1, 0) = *p_.tri_c * std::sinh(2.0 * l);
    }
    return k;
  }

  /// U_-(λ) = M(λ) K_-(λ) M̂(λ).
  Block2 u_minus(cplx lam) const { return (monodromy(lam) * k_matrix(Side::Minus, lam)) * monodromy_hat(lam); }

  /// U_+^{t0}(λ) = M^{t0}(λ) K_+^{t0}(λ) M̂^{t0}(λ).
  Block2 u_plus_t(cplx lam) const {
    return (aux_transpose(monodromy(lam)) * Eigen::Matrix2cd(k_matrix(Side::Plus, lam).transpose())) *
           aux_transpose(monodromy_hat(lam));
  }

  Block2 u_plus(cplx lam) const { return aux_transpose(u_plus_t(lam)); }

  Block2 u(Side eps, cplx lam) const { return eps == Side::Minus ? u_minus(lam) : u_plus(lam); }

  Gens gens(Side eps, cplx lam) const {
    if (eps == Side::Minus) {
      Block2 x = u_minus(lam);
      return {std::move(x(0, 0)), std::move(x(0, 1)), std::move(x(1, 0)), std::move(x(1, 1))};
    }
    Block2 x = u_plus_t(lam);
    return {std::move(x(0, 0)), std::move(x(1, 0)), std::move(x(0, 1)), std::move(x(1, 1))};
  }

  CMatrix gen(Side eps, char g, cplx lam) const { return gens(eps, lam).get(g); }

  /// T(λ) = tr_0 K_+(λ) U_-(λ).
  CMatrix transfer(cplx lam) const {
    const Eigen::Matrix2cd k = k_matrix(Side::Plus, lam);
    const Gens g = gens(Side::Minus, lam);
    return k(0, 0) * g.A + k(0, 1) * g.C + k(1, 0) * g.B + k(1, 1) * g.D;
  }

  /// T(λ) = tr_0 K_-(λ) U_+(λ).
  CMatrix transfer_plus_form(cplx lam) const {
    const Eigen::Matrix2cd k = k_matrix(Side::Minus, lam);
    const Gens g = gens(Side::Plus, lam);
    return k(0, 0) * g.A + k(0, 1) * g.C + k(1, 0) * g.B + k(1, 1) * g.D;
  }

  /// Diagonal part a A_ε + d D_ε with the opposite boundary.
  CMatrix transfer_diag_part(Side eps, cplx lam) const {
    const Eigen::Matrix2cd k = k_matrix(opposite(eps), lam);
    const Gens g = gens(eps, lam);
    return k(0, 0) * g.A + k(1, 1) * g.D;
  }

  CMatrix transfer_diag_even_a(Side eps, cplx lam) const {
    const Side o = opposite(eps);
    return sans_a(o, lam) * gen(eps, 'A', lam) + sans_a(o, -lam) * gen(eps, 'A', -lam);
  }

  CMatrix transfer_diag_even_d(Side eps, cplx lam) const {
    const Side o = opposite(eps);
    return sans_d(o, lam) * gen(eps, 'D', lam) + sans_d(o, -lam) * gen(eps, 'D', -lam);
  }

  /// cosh(λ ± η/2)(A_ε + D_ε), the ζ_∓ = iπ/2 transfer matrix.
  CMatrix transfer_bar(Side eps, cplx lam) const {
    const Gens g = gens(eps, lam);
    const cplx f = std::cosh(lam - double(sgn(eps)) * p_.eta / 2.0);
    return f * (g.A + g.D);
  }

  /// Operator form of the quantum determinant (central).
  CMatrix detq_u_operator(Side eps, cplx lam) const {
    const cplx h = p_.eta / 2.0;
    if (eps == Side::Minus) {
      const Gens x = gens(Side::Minus, lam + h), y = gens(Side::Minus, -lam + h);
      return std::sinh(2.0 * lam - 2.0 * p_.eta) * (x.A * y.A + x.B * y.C);
    }
    const Gens x = gens(Side::Plus, lam - h), y = gens(Side::Plus, -lam - h);
    return std::sinh(2.0 * lam + 2.0 * p_.eta) * (x.A * y.A + x.C * y.B);
  }

  CMatrix detq_u_operator_alt(Side eps, cplx lam) const {
    const cplx h = p_.eta / 2.0;
    if (eps == Side::Minus) {
      const Gens x = gens(Side::Minus, lam + h), y = gens(Side::Minus, -lam + h);
      return std::sinh(2.0 * lam - 2.0 * p_.eta) * (x.D * y.D + x.C * y.B);
    }
    const Gens x = gens(Side::Plus, -lam - h), y = gens(Side::Plus, lam - h);
    return std::sinh(2.0 * lam + 2.0 * p_.eta) * (x.D * y.D + x.B * y.C);
  }

  // ---- scalar functions

  double parity() const { return (p_.n_sites % 2) ? -1.0 : 1.0; }

  cplx a(cplx lam) const {
    cplx r = 1;
    for (auto x : p_.xi) r *= std::sinh(lam - x + p_.eta / 2.0);
    return r;
  }
  cplx d(cplx lam) const { return a(lam - p_.eta); }
  cplx detq_m(cplx lam) const { return a(lam + p_.eta / 2.0) * d(lam - p_.eta / 2.0); }

  static std::pair<cplx, cplx> alpha_beta(cplx zeta, cplx kappa) {
    if (std::abs(kappa) == 0.0) throw ValidationError("alpha_beta: kappa = 0 has no finite solution");
    const cplx ap = std::asinh(std::exp(zeta) / (2.0 * kappa));
    const cplx am = std::asinh(-std::exp(-zeta) / (2.0 * kappa));
    return {(ap + am) / 2.0, (ap - am) / 2.0};
  }

  /// Factor of det_q K; on a κ = 0 side the limit with e^{λ} dropped (it cancels in every product used).
  cplx g(Side s, cplx lam) const {
    const BoundaryParams& b = boundary(s);
    const cplx h = double(sgn(s)) * p_.eta / 2.0;
    if (std::abs(b.kappa) == 0.0) return std::sinh(lam + h + b.zeta) / std::sinh(b.zeta);
    auto [al, be] = alpha_beta(b.zeta, b.kappa);
    return std::sinh(lam + al + h) * std::cosh(lam + be + h) / (std::sinh(al) * std::cosh(be));
  }

  cplx sans_A_minus(cplx lam) const { return g(Side::Minus, lam) * a(lam) * d(-lam); }
  cplx sans_D_plus(cplx lam) const { return g(Side::Plus, lam) * a(-lam) * d(lam); }

  cplx sans_a(Side s, cplx lam) const { return sans_a(s, lam, boundary(s).zeta); }
  cplx sans_a(Side s, cplx lam, cplx zeta) const {
    const double e = sgn(s);
    return std::sinh(2.0 * lam + e * p_.eta) * std::sinh(lam + zeta - e * p_.eta / 2.0) /
           (std::sinh(2.0 * lam) * std::sinh(zeta));
  }
  cplx sans_d(Side s, cplx lam) const { return sans_d(s, lam, boundary(s).zeta); }
  cplx sans_d(Side s, cplx lam, cplx zeta) const {
    const double e = sgn(s);
    return std::sinh(2.0 * lam + e * p_.eta) * std::sinh(zeta - lam + e * p_.eta / 2.0) /
           (std::sinh(2.0 * lam) * std::sinh(zeta));
  }

  /// sans-a at ζ = iπ/2.
  cplx bar_a(Side s, cplx lam) const {
    const double e = sgn(s);
    return std::cosh(lam - e * p_.eta / 2.0) * std::sinh(2.0 * lam + e * p_.eta) / std::sinh(2.0 * lam);
  }

  /// textsc-a_-(λ) = sans-a_+(λ) sans-A_-(λ)
  cplx coef_a_minus(cplx lam) const { return sans_a(Side::Plus, lam) * sans_A_minus(lam); }
  /// textsc-d_+(λ) = sans-d_-(λ) sans-D_+(λ)
  cplx coef_d_plus(cplx lam) const { return sans_d(Side::Minus, lam) * sans_D_plus(lam); }

  /// Coefficient function of the discrete system for the general side `eps`.
  cplx coef(Side eps, cplx lam) const { return eps == Side::Minus ? coef_a_minus(lam) : coef_d_plus(lam); }

  cplx k_factor(Side s, int n) const {
    const cplx x = p_.xi[n];
    const cplx k = std::sinh(2.0 * x + p_.eta) / std::sinh(2.0 * x - p_.eta);
    return s == Side::Minus ? k : 1.0 / k;
  }

  cplx alpha_factor(Side s, int n) const {
    const cplx x = p_.xi[n], e = p_.eta;
    if (s == Side::Minus)
      return std::sinh(2.0 * x + 2.0 * e) / (k_factor(s, n) * std::sinh(2.0 * x - 2.0 * e));
    return std::sinh(2.0 * x - 2.0 * e) / (k_factor(s, n) * std::sinh(2.0 * x + 2.0 * e));
  }

  /// det_q K from the matrix entries.
  cplx detq_k(Side s, cplx lam) const {
    const cplx h = p_.eta / 2.0;
    if (s == Side::Minus) {
      const auto x = k_matrix(s, lam + h), y = k_matrix(s, -lam + h);
      return std::sinh(2.0 * lam - 2.0 * p_.eta) * (x(0, 0) * y(0, 0) + x(0, 1) * y(1, 0));
    }
    const auto x = k_matrix(s, lam - h), y = k_matrix(s, -lam - h);
    return std::sinh(2.0 * lam + 2.0 * p_.eta) * (x(0, 0) * y(0, 0) + x(1, 0) * y(0, 1));
  }

  cplx detq_k_factorized(Side s, cplx lam) const {
    const cplx h = p_.eta / 2.0;
    if (s == Side::Minus) return std::sinh(2.0 * lam - 2.0 * p_.eta) * g(s, lam + h) * g(s, -lam + h);
    return std::sinh(2.0 * lam + 2.0 * p_.eta) * g(s, lam - h) * g(s, -lam - h);
  }

  cplx detq_u(Side eps, cplx lam) const {
    const cplx h = p_.eta / 2.0;
    if (eps == Side::Minus)
      return std::sinh(2.0 * lam - 2.0 * p_.eta) * sans_A_minus(lam + h) * sans_A_minus(-lam + h);
    return std::sinh(2.0 * lam + 2.0 * p_.eta) * sans_D_plus(lam - h) * sans_D_plus(-lam - h);
  }

  /// Quantum determinant of the ζ_∓ = iπ/2 boundary monodromy.
  cplx detq_u_bar(Side eps, cplx lam) const {
    const cplx h = p_.eta / 2.0, ip2 = kI * kPi / 2.0;
    if (eps == Side::Minus) {
      auto f = [&](cplx x) { return sans_a(Side::Plus, x, ip2) * sans_A_minus(x); };
      return f(lam + h) * f(-lam + h);
    }
    auto f = [&](cplx x) { return sans_d(Side::Minus, x, ip2) * sans_D_plus(x); };
    return f(-lam - h) * f(lam - h);
  }

  cplx coth(Side s) const { return 1.0 / std::tanh(boundary(s).zeta); }

  // ---- SOV points

  cplx zeta_pt(int a, int h) const { return p_.xi[a] + (double(h) - 0.5) * p_.eta; }
  cplx eta_pt(int a, int h) const { return std::cosh(2.0 * zeta_pt(a, h)); }

  CMatrix local(const Eigen::Matrix2cd& u, int site) const { return site_op(u, site, p_.n_sites); }

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return std::hash<std::uint64_t>()(k.first * 1000003u ^ k.second); }
  };
  struct Cache {
    std::mutex mu;
    std::unordered_map<Key, Block2, KeyHash> m;
  };
  static Key key_of(cplx z) {
    Key k;
    double re = z.real(), im = z.imag();
    std::memcpy(&k.first, &re, 8);
    std::memcpy(&k.second, &im, 8);
    return k;
  }

  ModelParams p_;
  Eigen::Index dim_ = 2;
  std::shared_ptr<Cache> cache_;
};

/// Worst relative residual of the parity relations of U_- and U_+ at λ.
inline double parity_residual(const Model& m, cplx l) {
  const cplx e = m.eta(), s2 = std::sinh(2.0 * l);
  const Gens a = m.gens(Side::Minus, l), b = m.gens(Side::Minus, -l);
  const Gens c = m.gens(Side::Plus, l), d = m.gens(Side::Plus, -l);
  const cplx rm = -std::sinh(2.0 * l + e) / std::sinh(2.0 * l - e), rp = -std::sinh(2.0 * l - e) / std::sinh(2.0 * l + e);
  return std::max({rel_diff(a.D, CMatrix(std::sinh(2.0 * l - e) / s2 * b.A + std::sinh(e) / s2 * a.A)),
                   rel_diff(b.B, CMatrix(rm * a.B)), rel_diff(b.C, CMatrix(rm * a.C)),
                   rel_diff(c.D, CMatrix(std::sinh(2.0 * l + e) / s2 * d.A - std::sinh(e) / s2 * c.A)),
                   rel_diff(d.B, CMatrix(rp * c.B)), rel_diff(d.C, CMatrix(rp * c.C))});
}

/// Open-chain Hamiltonian with boundary fields (site 1: minus data, site N: plus data).
inline CMatrix hamiltonian(const ModelParams& p) {
  const int n = p.n_sites;
  const cplx e = p.eta;
  const Eigen::Index dim = Eigen::Index(1) << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int i = 0; i + 1 < n; ++i)
    h += site_op(pauli::x(), i, n) * site_op(pauli::x(), i + 1, n) +
         site_op(pauli::y(), i, n) * site_op(pauli::y(), i + 1, n) +
         std::cosh(e) * site_op(pauli::z(), i, n) * site_op(pauli::z(), i + 1, n);
  auto field = [&](const BoundaryParams& b, int site) -> CMatrix {
    return std::sinh(e) / std::sinh(b.zeta) *
           (std::cosh(b.zeta) * site_op(pauli::z(), site, n) +
            2.0 * b.kappa *
                (std::cosh(b.tau) * site_op(pauli::x(), site, n) + kI * std::sinh(b.tau) * site_op(pauli::y(), site, n)));
  };
  h += field(p.minus, 0);
  h += field(p.plus, n - 1);
  return h;
}

/// Off-identity part of 2 sinh^{1-2N}η / (tr K_+ tr K_-) dT/dλ|_{η/2} - H, central difference.
inline double hamiltonian_link_residual(const ModelParams& p_in, double step = 1e-5) {
  ModelParams p = p_in;
  p.xi.assign(p.n_sites, 0.0);
  const Model m(p, true);
  const CMatrix h = hamiltonian(p);
  const cplx e = p.eta;
  const CMatrix dt = (m.transfer(e / 2.0 + step) - m.transfer(e / 2.0 - step)) / (2.0 * step);
  const cplx scale = 2.0 * std::pow(std::sinh(e), 1 - 2 * p.n_sites) /
                     (m.k_matrix(Side::Plus, e / 2.0).trace() * m.k_matrix(Side::Minus, e / 2.0).trace());
  CMatrix x = scale * dt - h;
  const cplx c = x.trace() / double(m.dim());
  x -= c * m.identity();
  return max_abs(x) / std::max(1.0, max_abs(h));
}

/// Random admissible parameters; both boundaries general when `both_general`.
inline ModelParams random_params(int n, std::uint64_t seed, Case c, bool both_general = false,
                                 bool triangular = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  auto rnd = [&] { return cplx(u(rng), u(rng)); };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ModelParams p;
    p.n_sites = n;
    p.bcase = c;
    p.eta = cplx(0.5 + 0.4 * u(rng) / 0.6 * 0.5, 0.6 + 0.5 * u(rng));
    p.xi.clear();
    for (int k = 0; k < n; ++k) p.xi.push_back(rnd());
    p.minus = {rnd() + 0.3, rnd() + 0.3, rnd() + 0.3};
    p.plus = {rnd() + 0.3, rnd() + 0.3, rnd() + 0.3};
    if (!both_general) {
      BoundaryParams& con = c == Case::Minus ? p.plus : p.minus;
      con.kappa = 0;
      if (triangular) p.tri_c = rnd() + 0.3;
    }
    try {
      validate_guards(p, 0.05);
      if (!both_general) validate_class(p, 0.05);
      return p;
    } catch (const ValidationError&) {
    }
  }
  throw ValidationError("random_params: no admissible draw");
}

enum class Regime { I, II };

/// Regime I: iη, iζ±, κ±, iτ±, ξ real. Regime II: η, ζ±, κ±, iτ±, iξ real.
inline ModelParams regime_params(int n, std::uint64_t seed, Regime r) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.2, 0.9), v(-0.8, 0.8);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    ModelParams p;
    p.n_sites = n;
    const cplx unit = r == Regime::I ? kI : cplx(1.0);
    p.eta = unit * u(rng);
    p.minus = {unit * u(rng), v(rng), kI * v(rng)};
    p.plus = {unit * u(rng), v(rng), kI * v(rng)};
    p.xi.clear();
    for (int k = 0; k < n; ++k) p.xi.push_back(r == Regime::I ? cplx(v(rng)) : kI * v(rng));
    try {
      validate_guards(p, 0.05);
      return p;
    } catch (const ValidationError&) {
    }
  }
  throw ValidationError("regime_params: no admissible draw");
}

}  // namespace sovxxz
