#include <sovxxz/numkit.hpp>

#include <gtest/gtest.h>

using namespace sovxxz;

namespace {

CMatrix random_matrix(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

cplx cofactor_det(const CMatrix& a) {
  const auto n = a.rows();
  if (n == 1) return a(0, 0);
  cplx s = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    CMatrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = a(r, c);
    s += ((j % 2) ? -1.0 : 1.0) * a(0, j) * cofactor_det(minor);
  }
  return s;
}

Eigen::Matrix2cd sz() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST(Kron, IdentityAndBlocks) {
  EXPECT_EQ(max_abs(kron(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)) - CMatrix::Identity(4, 4)), 0.0);
  CMatrix d = kron(CMatrix(sz()), CMatrix::Identity(2, 2));
  CMatrix expect = CMatrix::Zero(4, 4);
  expect.diagonal() << 1, 1, -1, -1;
  EXPECT_EQ(max_abs(d - expect), 0.0);
  CMatrix r = kron(random_matrix(2, 1), random_matrix(3, 2));
  EXPECT_EQ(r.rows(), 6);
  EXPECT_EQ(r.cols(), 6);
}

TEST(Kron, Associative) {
  CMatrix a = random_matrix(2, 3), b = random_matrix(3, 4), c = random_matrix(2, 5);
  EXPECT_LT(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))), 1e-13);
}

TEST(Det, SimpleCases) {
  EXPECT_NEAR(std::abs(det(CMatrix::Identity(3, 3)) - 1.0), 0.0, 1e-15);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 3;
  EXPECT_NEAR(std::abs(det(d) - 6.0), 0.0, 1e-14);
  EXPECT_THROW(det(CMatrix::Zero(2, 3)), NumError);
}

TEST(Det, MatchesCofactorExpansion) {
  for (int s = 0; s < 10; ++s) {
    CMatrix a = random_matrix(4, 100 + s);
    EXPECT_LT(std::abs(det(a) - cofactor_det(a)), 1e-12 * std::max(1.0, std::abs(det(a))));
  }
}

TEST(Det, Multiplicative) {
  for (int s = 0; s < 10; ++s) {
    CMatrix a = random_matrix(4, 200 + s), b = random_matrix(4, 300 + s);
    const cplx p = det(a) * det(b);
    EXPECT_LT(std::abs(det(a * b) - p), 1e-10 * std::abs(p));
  }
}

TEST(CharPoly, Identity) {
  CPoly p = char_poly(CMatrix::Identity(2, 2));
  ASSERT_EQ(p.degree(), 2);
  EXPECT_LT(std::abs(p.coeffs[0] - 1.0), 1e-14);
  EXPECT_LT(std::abs(p.coeffs[1] + 2.0), 1e-14);
  EXPECT_LT(std::abs(p.coeffs[2] - 1.0), 1e-14);
}

TEST(CharPoly, TraceCoefficient) {
  CMatrix a = random_matrix(6, 7);
  CPoly p = char_poly(a);
  EXPECT_LT(std::abs(p.coeffs[5] + a.trace()), 1e-10);
}

TEST(CharPoly, Companion) {
  CPoly p{{cplx(2, 1), cplx(-1, 0.5), cplx(0.3, 0), cplx(1, -2), 1.0}};
  const int n = p.degree();
  CMatrix c = CMatrix::Zero(n, n);
  for (int i = 1; i < n; ++i) c(i, i - 1) = 1;
  for (int i = 0; i < n; ++i) c(i, n - 1) = -p.coeffs[i];
  CPoly q = char_poly(c);
  for (int i = 0; i <= n; ++i) EXPECT_LT(std::abs(q.coeffs[i] - p.coeffs[i]), 1e-10);
}

TEST(CharPoly, DimensionBound) { EXPECT_THROW(char_poly(CMatrix::Identity(257, 257)), NumError); }

TEST(PolyRoots, Quadratic) {
  auto r = poly_roots(CPoly{{1.0, 0.0, 1.0}});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LT(std::abs(r[0] + kI), 1e-12);
  EXPECT_LT(std::abs(r[1] - kI), 1e-12);
}

TEST(PolyRoots, FromFactors) {
  CPoly p{{1.0}};
  for (int k = 1; k <= 5; ++k) {
    std::vector<cplx> next(p.coeffs.size() + 1, 0.0);
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
      next[i + 1] += p.coeffs[i];
      next[i] -= double(k) * p.coeffs[i];
    }
    p.coeffs = next;
  }
  auto r = poly_roots(p);
  for (int k = 1; k <= 5; ++k) EXPECT_LT(std::abs(r[k - 1] - double(k)), 1e-10);
}

TEST(PolyRoots, Linear) {
  auto r = poly_roots(CPoly{{cplx(3, 1), cplx(2, 0)}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_LT(std::abs(r[0] + cplx(1.5, 0.5)), 1e-15);
}

TEST(PolyRoots, VietaAgainstCharPoly) {
  CMatrix a = random_matrix(7, 11);
  CPoly p = char_poly(a);
  auto r = poly_roots(p);
  cplx s = 0;
  for (auto z : r) s += z;
  EXPECT_LT(std::abs(s + p.coeffs[6]), 1e-9);
}

TEST(InverseIteration, SmallCases) {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 2;
  CVector v = inverse_iteration(d, 2.0);
  EXPECT_LT(std::abs(v[0]), 1e-9);
  EXPECT_NEAR(std::abs(v[1]), 1.0, 1e-12);
  CMatrix x(2, 2);
  x << 0, 1, 1, 0;
  v = inverse_iteration(x, 1.0);
  EXPECT_NEAR(std::abs(v[0]), 1 / std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(std::abs(v[1]), 1 / std::sqrt(2.0), 1e-9);
}

TEST(InverseIteration, SpectralConstruction) {
  CMatrix s = random_matrix(8, 21);
  CMatrix lam = CMatrix::Zero(8, 8);
  for (int i = 0; i < 8; ++i) lam(i, i) = cplx(i + 1, 0.5 * i);
  CMatrix a = s * lam * s.inverse();
  Eigen::ComplexEigenSolver<CMatrix> es(a, false);
  for (auto mu : es.eigenvalues()) {
    CVector v = inverse_iteration(a, mu);
    cplx ev = v.dot(a * v);
    EXPECT_LT((a * v - ev * v).norm(), 1e-9 * max_abs(a));
  }
}

TEST(Tolerance, Mixed) {
  Tolerance t;
  EXPECT_TRUE(t.close(1.0, 1.0 + 5e-10));
  EXPECT_FALSE(t.close(1.0, 1.0 + 1e-8));
  EXPECT_TRUE(t.close(0.0, 5e-11));
}

TEST(ParallelFor, DeterministicByIndex) {
  std::vector<int> out(100);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = int(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], int(i * i));
}
