#include <sovxxz/sov.hpp>

#include <gtest/gtest.h>

using namespace sovxxz;

namespace {

Model model(int n, std::uint64_t seed, Case c, bool tri = false) { return Model(random_params(n, seed, c, false, tri)); }

}  // namespace

TEST(HVector, IndexBijection) {
  for (unsigned idx = 0; idx < 32; ++idx) EXPECT_EQ(h_index(h_vector(idx, 5)), idx);
  EXPECT_EQ(h_index({1, 0, 1}), 5u);
}

TEST(Measure, SingleSiteIsOne) {
  Model m = model(1, 1, Case::Minus);
  EXPECT_EQ(measure(m, 0), cplx(1.0));
  EXPECT_EQ(measure(m, 1), cplx(1.0));
}

TEST(BEigenvalue, ZerosAndForms) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (Case c : {Case::Minus, Case::Plus}) {
    Model m = model(3, 3, c);
    const Side eps = general_side(c);
    for (unsigned idx = 0; idx < 8; ++idx) {
      for (int a = 0; a < 3; ++a) {
        const cplx z = m.zeta_pt(a, h_bit(idx, a));
        EXPECT_LT(std::abs(b_eigenvalue(m, eps, idx, z)), 1e-14);
      }
      for (int k = 0; k < 5; ++k) {
        const cplx lam(u(rng), u(rng));
        EXPECT_LT(rel_diff(b_eigenvalue(m, eps, idx, lam), b_eigenvalue_cosh(m, eps, idx, lam)), 1e-12);
      }
    }
  }
}

TEST(BEigenvalue, ReferenceVector) {
  Model m = model(3, 4, Case::Minus);
  const auto& b = m.boundary(Side::Minus);
  const cplx lam(0.3, -0.15);
  const cplx expect = b.kappa * std::exp(b.tau) * std::sinh(2.0 * lam - m.eta()) * m.a(lam) * m.a(-lam) /
                      std::sinh(b.zeta);
  EXPECT_LT(rel_diff(b_eigenvalue(m, Side::Minus, 0, lam), m.parity() * expect), 1e-12);
}

TEST(Basis, ReferenceStatesAreEmptyProducts) {
  Model m = model(3, 5, Case::Minus);
  SovBasis b = build_basis(m, Side::Minus);
  EXPECT_LT(max_abs(b.left[0] - ref_up(m) / b.norm), 1e-14);
  Model p = model(3, 5, Case::Plus);
  SovBasis c = build_basis(p, Side::Plus);
  EXPECT_LT(max_abs(c.right[0] - ref_down(p) / c.norm), 1e-14);
}

TEST(Basis, EigenPairingResolution) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (Case c : {Case::Minus, Case::Plus})
    for (bool tri : {false, true})
      for (int n : {1, 2, 3, 4}) {
        Model m = model(n, 10 * n + (tri ? 1 : 0), c, tri);
        SovBasis b = build_basis(m, general_side(c));
        for (int k = 0; k < 5; ++k) EXPECT_LT(b_eigen_residual(m, b, cplx(u(rng), u(rng))), 1e-9);
        EXPECT_LT(pairing_residual(m, b), 1e-9);
        EXPECT_LT(identity_resolution(m, b), 1e-9);
      }
}

TEST(Basis, TwoSiteNormalization) {
  Model m = model(2, 7, Case::Minus);
  SovBasis b = build_basis(m, Side::Minus);
  for (unsigned idx = 0; idx < 4; ++idx) {
    const cplx p = b.left[idx].transpose() * b.right[idx];
    EXPECT_LT(std::abs(measure(m, idx) * p - 1.0), 1e-9);
  }
}

TEST(Basis, Invertible) {
  Model m = model(4, 8, Case::Plus);
  SovBasis b = build_basis(m, Side::Plus);
  const CMatrix r = right_matrix(b);
  CMatrix rn = r;
  for (Eigen::Index j = 0; j < rn.cols(); ++j) rn.col(j) /= rn.col(j).norm();
  Eigen::JacobiSVD<CMatrix> svd(rn);
  const auto sv = svd.singularValues();
  EXPECT_GT(sv(sv.size() - 1), 1e-10 * sv(0));
}

TEST(Basis, DMinusAnnihilatesRightStates) {
  Model m = model(3, 9, Case::Minus);
  SovBasis b = build_basis(m, Side::Minus);
  for (int a = 0; a < 3; ++a) {
    const CMatrix d = m.gen(Side::Minus, 'D', -m.params().xi[a] - m.eta() / 2.0);
    for (unsigned idx = 0; idx < 8; ++idx)
      if (h_bit(idx, a) == 1) EXPECT_LT(max_abs(d * b.right[idx]) / (max_abs(d) * max_abs(b.right[idx])), 1e-9);
  }
}

TEST(Basis, RejectsWrongSide) {
  Model m = model(2, 10, Case::Minus);
  EXPECT_THROW(build_basis(m, Side::Plus), ValidationError);
}

TEST(Interpolation, MatchesDirectAction) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (Case c : {Case::Minus, Case::Plus}) {
    Model m = model(3, 12, c);
    const Side eps = general_side(c);
    SovBasis b = build_basis(m, eps);
    const std::vector<Action> acts = c == Case::Minus ? std::vector<Action>{Action::LeftAMinus, Action::RightDMinus}
                                                      : std::vector<Action>{Action::LeftDPlus, Action::RightAPlus};
    for (Action g : acts)
      for (unsigned idx = 0; idx < 8; ++idx) {
        const cplx lam(u(rng), u(rng));
        const CVector x = interpolated_action(m, b, g, idx, lam), y = direct_action(m, b, g, idx, lam);
        EXPECT_LT(rel_diff(x, y), 1e-8);
      }
  }
}

TEST(Interpolation, FixedPointAndNode) {
  Model m = model(3, 13, Case::Minus);
  SovBasis b = build_basis(m, Side::Minus);
  const cplx h = m.eta() / 2.0;
  for (unsigned idx = 0; idx < 8; ++idx) {
    const CVector x = direct_action(m, b, Action::LeftAMinus, idx, h);
    EXPECT_LT(rel_diff(x, CVector(m.parity() * m.detq_m(0.0) * b.left[idx])), 1e-9);
  }
  // at a node only the shifted term survives
  const cplx z = m.zeta_pt(0, 1);
  const CVector x = direct_action(m, b, Action::LeftAMinus, 0b111, z);
  EXPECT_LT(rel_diff(x, CVector(m.sans_A_minus(z) * b.left[0b110])), 1e-9);
  const CVector y = direct_action(m, b, Action::LeftAMinus, 0b110, m.zeta_pt(0, 0));
  EXPECT_LT(max_abs(y) / max_abs(b.left[0b110]), 1e-9 * max_abs(m.gen(Side::Minus, 'A', m.zeta_pt(0, 0))));
}
