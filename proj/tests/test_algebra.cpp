#include <sovxxz/algebra.hpp>

#include <gtest/gtest.h>

using namespace sovxxz;

namespace {

ModelParams general(int n, std::uint64_t seed) { return random_params(n, seed, Case::Minus, true); }

cplx rnd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  return {u(rng), u(rng)};
}

}  // namespace

TEST(RMatrix, PermutationAtZero) {
  const cplx eta(0.4, 0.7);
  CMatrix p = CMatrix::Zero(4, 4);
  p(0, 0) = p(3, 3) = p(1, 2) = p(2, 1) = 1;
  EXPECT_LT(max_abs(r_matrix(0.0, eta) - std::sinh(eta) * p), 1e-15);
  const cplx lam(0.3, -0.2);
  EXPECT_LT(std::abs(r_matrix(lam, eta)(0, 0) - std::sinh(lam + eta)), 1e-15);
}

TEST(RMatrix, YangBaxter) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) EXPECT_LT(yang_baxter_residual(rnd(rng), rnd(rng), cplx(0.45, 0.6)), 1e-11);
}

TEST(KMatrix, DiagonalAtZeroKappa) {
  ModelParams p = random_params(2, 5, Case::Minus);
  Model m(p);
  const cplx lam(0.2, 0.1);
  auto k = m.k_matrix(Side::Plus, lam);
  EXPECT_EQ(std::abs(k(0, 1)), 0.0);
  EXPECT_EQ(std::abs(k(1, 0)), 0.0);
  EXPECT_LT(std::abs(k(0, 0) - std::sinh(lam + p.plus.zeta + p.eta / 2.0) / std::sinh(p.plus.zeta)), 1e-14);
}

TEST(KMatrix, ReflectionEquation) {
  Model m(general(1, 7));
  std::mt19937_64 rng(4);
  for (Side s : {Side::Minus}) {
    auto u = [&](cplx x) { return scalar_block(m.k_matrix(s, x)); };
    for (int k = 0; k < 20; ++k) EXPECT_LT(reflection_residual(u, rnd(rng), rnd(rng), m.eta()), 1e-11);
  }
}

TEST(KMatrix, QuantumDeterminantFactorizes) {
  Model m(general(1, 9));
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const cplx lam = rnd(rng);
    for (Side s : {Side::Minus, Side::Plus})
      EXPECT_LT(rel_diff(m.detq_k(s, lam), m.detq_k_factorized(s, lam)), 1e-10);
  }
}

TEST(AlphaBeta, DefiningIdentities) {
  const cplx zeta(0.4, 0.3), kappa(0.7, -0.2);
  auto [al, be] = Model::alpha_beta(zeta, kappa);
  EXPECT_LT(std::abs(std::sinh(al + be) - std::exp(zeta) / (2.0 * kappa)), 1e-12);
  EXPECT_LT(std::abs(std::sinh(al - be) + std::exp(-zeta) / (2.0 * kappa)), 1e-12);
  EXPECT_LT(std::abs(std::sinh(al) * std::cosh(be) - std::sinh(zeta) / (2.0 * kappa)), 1e-12);
  EXPECT_LT(std::abs(std::cosh(al) * std::sinh(be) - std::cosh(zeta) / (2.0 * kappa)), 1e-12);
  EXPECT_THROW(Model::alpha_beta(zeta, 0.0), ValidationError);
}

TEST(Monodromy, SingleSite) {
  ModelParams p = general(1, 11);
  Model m(p);
  const cplx lam(0.3, 0.2);
  CMatrix full = m.monodromy(lam).full();
  // aux ⊗ site ordering of the block matrix equals R_{01}
  EXPECT_LT(max_abs(full - r_matrix(lam - p.xi[0] - p.eta / 2.0, p.eta)), 1e-14);
}

TEST(Monodromy, ReferenceState) {
  Model m(general(3, 12));
  const cplx lam(0.17, -0.4);
  Block2 x = m.monodromy(lam);
  CVector up = CVector::Zero(m.dim());
  up[0] = 1;
  EXPECT_LT(max_abs(up.transpose() * x(0, 1)), 1e-13);
  EXPECT_LT(max_abs(up.transpose() * x(0, 0) - m.a(lam) * up.transpose()), 1e-13);
}

TEST(Monodromy, BulkQuantumDeterminant) {
  Model m(general(3, 13));
  const cplx lam(0.27, 0.11), h = m.eta() / 2.0;
  Block2 x = m.monodromy(lam + h), y = m.monodromy(lam - h);
  CMatrix q = x(0, 0) * y(1, 1) - x(0, 1) * y(1, 0);
  EXPECT_LT(rel_diff(q, m.detq_m(lam) * m.identity()), 1e-10);
}

TEST(BoundaryMonodromy, ReflectionEquationBothSides) {
  Model m(general(2, 14));
  std::mt19937_64 rng(6);
  auto um = [&](cplx x) { return m.u_minus(x); };
  auto vp = [&](cplx x) { return m.u_plus_t(-x); };
  for (int k = 0; k < 10; ++k) {
    const cplx l = rnd(rng), mu = rnd(rng);
    EXPECT_LT(reflection_residual(um, l, mu, m.eta()), 1e-10);
    EXPECT_LT(reflection_residual(vp, l, mu, m.eta()), 1e-10);
  }
}

TEST(BoundaryMonodromy, FixedPoints) {
  for (int n : {1, 2, 3}) {
    Model m(general(n, 20 + n));
    const cplx h = m.eta() / 2.0, ip = kI * kPi / 2.0;
    const cplx d0 = m.parity() * m.detq_m(0.0);
    Block2 u = m.u_minus(h);
    EXPECT_LT(rel_diff(u(0, 0), d0 * m.identity()), 1e-10);
    EXPECT_LT(max_abs(u(0, 1)) / std::abs(d0), 1e-10);
    EXPECT_LT(rel_diff(u(1, 1), d0 * m.identity()), 1e-10);
    Block2 up = m.u_plus(-h);
    EXPECT_LT(rel_diff(up(0, 0), d0 * m.identity()), 1e-10);
    EXPECT_LT(rel_diff(up(1, 1), d0 * m.identity()), 1e-10);
    const cplx cm = kI * m.coth(Side::Minus) * m.detq_m(ip);
    u = m.u_minus(h + ip);
    EXPECT_LT(rel_diff(u(0, 0), cm * m.identity()), 1e-10);
    EXPECT_LT(rel_diff(u(1, 1), -cm * m.identity()), 1e-10);
    const cplx cp = kI * m.coth(Side::Plus) * m.detq_m(ip);
    up = m.u_plus(-h + ip);
    EXPECT_LT(rel_diff(up(0, 0), cp * m.identity()), 1e-10);
    EXPECT_LT(rel_diff(up(1, 1), -cp * m.identity()), 1e-10);
  }
}

TEST(BoundaryMonodromy, ParityRelations) {
  Model m(general(3, 30));
  const cplx e = m.eta();
  std::mt19937_64 rng(7);
  for (int k = 0; k < 5; ++k) {
    const cplx l = rnd(rng);
    Gens a = m.gens(Side::Minus, l), b = m.gens(Side::Minus, -l);
    const cplx s2 = std::sinh(2.0 * l);
    EXPECT_LT(rel_diff(a.D, std::sinh(2.0 * l - e) / s2 * b.A + std::sinh(e) / s2 * a.A), 1e-10);
    EXPECT_LT(rel_diff(b.B, -std::sinh(2.0 * l + e) / std::sinh(2.0 * l - e) * a.B), 1e-10);
    EXPECT_LT(rel_diff(b.C, -std::sinh(2.0 * l + e) / std::sinh(2.0 * l - e) * a.C), 1e-10);
    Gens c = m.gens(Side::Plus, l), d = m.gens(Side::Plus, -l);
    EXPECT_LT(rel_diff(c.D, std::sinh(2.0 * l + e) / s2 * d.A - std::sinh(e) / s2 * c.A), 1e-10);
    EXPECT_LT(rel_diff(d.B, -std::sinh(2.0 * l - e) / std::sinh(2.0 * l + e) * c.B), 1e-10);
    EXPECT_LT(rel_diff(d.C, -std::sinh(2.0 * l - e) / std::sinh(2.0 * l + e) * c.C), 1e-10);
  }
}

TEST(BoundaryMonodromy, QuantumDeterminants) {
  Model m(general(3, 31));
  std::mt19937_64 rng(8);
  for (int k = 0; k < 5; ++k) {
    const cplx l = rnd(rng), mu = rnd(rng);
    for (Side s : {Side::Minus, Side::Plus}) {
      const cplx ex = m.detq_u(s, l);
      EXPECT_LT(rel_diff(m.detq_u_operator(s, l), ex * m.identity()), 1e-9);
      EXPECT_LT(rel_diff(m.detq_u_operator_alt(s, l), ex * m.identity()), 1e-9);
      const CMatrix q = m.detq_u_operator(s, l);
      for (char g : {'A', 'B', 'C', 'D'}) {
        const CMatrix x = m.gen(s, g, mu);
        EXPECT_LT(max_abs(q * x - x * q) / (max_abs(q) * max_abs(x)), 1e-10);
      }
    }
  }
}

TEST(Transfer, EvenCommutingAndBothForms) {
  Model m(general(3, 32));
  std::mt19937_64 rng(9);
  for (int k = 0; k < 10; ++k) {
    const cplx l = rnd(rng), mu = rnd(rng);
    const CMatrix t = m.transfer(l), tm = m.transfer(mu);
    EXPECT_LT(rel_diff(t, m.transfer(-l)), 1e-11);
    EXPECT_LT(rel_diff(t, m.transfer_plus_form(l)), 1e-11);
    EXPECT_LT(max_abs(t * tm - tm * t) / (max_abs(t) * max_abs(tm)), 1e-10);
  }
}

TEST(Transfer, FixedValues) {
  for (int n : {1, 2, 3, 4}) {
    Model m(general(n, 40 + n));
    const cplx h = m.eta() / 2.0, ip = kI * kPi / 2.0;
    const cplx v0 = 2.0 * std::cosh(m.eta()) * m.parity() * m.detq_m(0.0);
    const cplx v1 = -2.0 * std::cosh(m.eta()) * m.coth(Side::Minus) * m.coth(Side::Plus) * m.detq_m(ip);
    for (double s : {1.0, -1.0}) {
      EXPECT_LT(rel_diff(m.transfer(s * h), v0 * m.identity()), 1e-10);
      EXPECT_LT(rel_diff(m.transfer(s * (h - ip)), v1 * m.identity()), 1e-10);
    }
  }
}

TEST(Transfer, DiagonalPartEvenForms) {
  for (Case c : {Case::Minus, Case::Plus}) {
    Model m(random_params(3, 50, c));
    const Side eps = general_side(c);
    const cplx l(0.21, -0.13);
    const CMatrix td = m.transfer_diag_part(eps, l);
    EXPECT_LT(rel_diff(td, m.transfer_diag_even_a(eps, l)), 1e-10);
    EXPECT_LT(rel_diff(td, m.transfer_diag_even_d(eps, l)), 1e-10);
    // split T = diagonal part + c B
    const auto k = m.k_matrix(opposite(eps), l);
    EXPECT_LT(rel_diff(m.transfer(l), td + k(1, 0) * m.gen(eps, 'B', l)), 1e-10);
  }
}

TEST(Transfer, Hermiticity) {
  for (Regime r : {Regime::I, Regime::II})
    for (int n : {1, 2, 3}) {
      Model m(regime_params(n, 60 + n, r));
      for (cplx l : {cplx(0.3, 0.2), cplx(-0.1, 0.45)}) {
        const CMatrix t = m.transfer(l);
        EXPECT_LT(rel_diff(CMatrix(t.adjoint()), m.transfer(std::conj(l))), 1e-10);
      }
      EXPECT_LT(rel_diff(CMatrix(hamiltonian(m.params()).adjoint()), hamiltonian(m.params())), 1e-12);
    }
}

TEST(Hamiltonian, DiagonalBoundaries) {
  ModelParams p = random_params(2, 70, Case::Minus);
  p.minus.kappa = 0;
  p.xi = {0.0, 0.0};
  const CMatrix h = hamiltonian(p);
  const cplx e = p.eta;
  const CMatrix expect = site_op(pauli::x(), 0, 2) * site_op(pauli::x(), 1, 2) +
                         site_op(pauli::y(), 0, 2) * site_op(pauli::y(), 1, 2) +
                         std::cosh(e) * site_op(pauli::z(), 0, 2) * site_op(pauli::z(), 1, 2) +
                         std::sinh(e) * (site_op(pauli::z(), 0, 2) / std::tanh(p.minus.zeta) +
                                         site_op(pauli::z(), 1, 2) / std::tanh(p.plus.zeta));
  EXPECT_LT(max_abs(h - expect), 1e-13);
}

TEST(Hamiltonian, TransferDerivativeLink) {
  for (int n : {2, 3}) EXPECT_LT(hamiltonian_link_residual(general(n, 80 + n)), 1e-6);
}

TEST(Guards, ESovAndClass) {
  ModelParams p = random_params(3, 90, Case::Minus);
  p.xi[1] = p.xi[0];
  try {
    Model m(p);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,2,0)"), std::string::npos);
  }
  ModelParams q = random_params(3, 91, Case::Minus);
  q.minus.kappa = 0;
  try {
    validate(q);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("vanishes"), std::string::npos);
  }
}

TEST(Pauli, LocalAlgebra) {
  const CMatrix sm = site_op(pauli::minus(), 1, 3);
  EXPECT_EQ(max_abs(sm * sm), 0.0);
  const CMatrix sx0 = site_op(pauli::x(), 0, 3), sz2 = site_op(pauli::z(), 2, 3);
  EXPECT_EQ(max_abs(sx0 * sz2 - sz2 * sx0), 0.0);
}

TEST(ScalarFunctions, Relations) {
  Model m(general(3, 92));
  const cplx l(0.31, 0.07);
  EXPECT_LT(rel_diff(m.d(l), m.a(l - m.eta())), 1e-15);
  EXPECT_LT(rel_diff(m.sans_A_minus(l), m.g(Side::Minus, l) * m.a(l) * m.d(-l)), 1e-15);
}

TEST(KMatrix, ConstrainedSideFactorization) {
  for (bool tri : {false, true})
    for (Case c : {Case::Minus, Case::Plus}) {
      Model m(random_params(2, 93, c, false, tri));
      const Side s = opposite(general_side(c));
      for (cplx lam : {cplx(0.2, 0.3), cplx(-0.4, 0.1)})
        EXPECT_LT(rel_diff(m.detq_k(s, lam), m.detq_k_factorized(s, lam)), 1e-12);
    }
}
