#pragma once

#include "sov.hpp"

namespace sovxxz {

/// Per-site values at (ζ_a^{(0)}, ζ_a^{(1)}).
struct SeparateState {
  bool left = false;
  Side eps = Side::Minus;
  std::vector<std::array<cplx, 2>> factors;
};

/// Σ_h ∏_a f_a(ζ_a^{(h_a)}) V(η^{(h)}) |ε,h⟩ (or the covector).
inline CVector assemble(const Model& m, const SovBasis& basis, const SeparateState& s) {
  if (s.eps != basis.eps) throw ValidationError("assemble: basis side mismatch");
  if (static_cast<int>(s.factors.size()) != m.n()) throw ValidationError("assemble: factor count");
  const auto& states = s.left ? basis.left : basis.right;
  CVector out = CVector::Zero(m.dim());
  for (unsigned idx = 0; idx < states.size(); ++idx) {
    cplx w = measure(m, idx);
    for (int a = 0; a < m.n(); ++a) w *= s.factors[a][h_bit(idx, a)];
    out += w * states[idx];
  }
  return out;
}

/// M_{a,b} = Σ_h α_a(ζ_a^{(h)}) β_a(ζ_a^{(h)}) (η_a^{(h)})^{b}, b = 0..N-1.
inline CMatrix pairing_matrix(const Model& m, const SeparateState& alpha, const SeparateState& beta) {
  if (alpha.eps != beta.eps) throw ValidationError("pairing: side mismatch");
  const int n = m.n();
  CMatrix mat(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      cplx s = 0;
      for (int h = 0; h < 2; ++h) s += alpha.factors[a][h] * beta.factors[a][h] * std::pow(m.eta_pt(a, h), b);
      mat(a, b) = s;
    }
  return mat;
}

inline cplx pairing_det(const Model& m, const SeparateState& alpha, const SeparateState& beta) {
  return det(pairing_matrix(m, alpha, beta));
}

/// max_a |(M dc)_a| relative to the term magnitudes Σ_{h,b} |α β η^b dc_b|; dc expands τ - τ' in powers of cosh 2λ.
inline double orthogonality_certificate(const Model& m, const SeparateState& alpha, const SeparateState& beta,
                                        const std::vector<cplx>& dc) {
  const CMatrix mat = pairing_matrix(m, alpha, beta);
  CVector c(dc.size());
  for (std::size_t i = 0; i < dc.size(); ++i) c[i] = dc[i];
  double sc = 0;
  for (int a = 0; a < m.n(); ++a) {
    double row = 0;
    for (int h = 0; h < 2; ++h) {
      const double w = std::abs(alpha.factors[a][h] * beta.factors[a][h]);
      for (int b = 0; b < m.n(); ++b) row += w * std::pow(std::abs(m.eta_pt(a, h)), b) * std::abs(c[b]);
    }
    sc = std::max(sc, row);
  }
  if (sc == 0) return 0;
  return max_abs(mat * c) / sc;
}

}  // namespace sovxxz
