#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/error.hpp"

using namespace eqw;

namespace {

SpectralField mode_field(double beta, const ModeIndex& m, int n_max, int k_max) {
  EigenMode e = build_mode(beta, m);
  SpectralField f(beta, n_max, k_max);
  for (int c = 0; c < 3; ++c)
    for (const auto& [h, v] : e.coeffs[c]) f.at(c, h, e.k()) = v;
  return f;
}

// L2 norm on the physical grid, independent of the coefficient-space Parseval identity.
double quadrature_norm(const SpectralField& f) {
  HermiteContext ctx(f.beta(), f.n_max() + 1);
  const QuadratureRule& r = ctx.rule(1.0);
  const int M = 2 * f.k_max() + 3;
  PhysicalField p = synthesize(f, r.nodes, M);
  double s = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < r.size(); ++i)
      for (int m = 0; m < M; ++m) s += r.full_weights[i] * (2 * std::numbers::pi / M) * std::norm(p.at(c, i, m));
  return std::sqrt(s);
}

// Pointwise L applied with finite-difference x1 derivatives.
std::array<cplx, 3> pointwise_L_residual(double beta, const EigenMode& e, double x) {
  HermiteContext ctx(beta, e.index.n + 2);
  const double h = 1e-3;
  auto comp = [&](int c, double y) {
    cplx s{};
    for (const auto& [n, v] : e.coeffs[c]) s += v * eval_psi(ctx, n, y);
    return s;
  };
  auto deriv = [&](int c) {
    return (comp(c, x - 2 * h) - 8.0 * comp(c, x - h) + 8.0 * comp(c, x + h) - comp(c, x + 2 * h)) / (12 * h);
  };
  const cplx ik(0.0, e.k());
  const cplx it(0.0, e.tau);
  cplx eta = comp(0, x), u1 = comp(1, x), u2 = comp(2, x);
  return {deriv(1) + ik * u2 - it * eta, beta * x * u2 + deriv(0) - it * u1, -beta * x * u1 + ik * eta - it * u2};
}

}  // namespace

TEST(Eigenbasis, KelvinMode) {
  EigenMode e = build_mode(1.0, {0, 5, 0});
  EXPECT_EQ(e.tau, 5.0);
  EXPECT_NEAR(std::abs(e.coeff(0, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-16);
  EXPECT_EQ(e.coeff(0, 0), e.coeff(2, 0));
  EXPECT_TRUE(e.coeffs[1].empty());
  SpectralField f = mode_field(1.0, {0, 5, 0}, 2, 5);
  HermiteContext ctx(1.0, 2);
  PhysicalField p = synthesize(f, std::vector<double>{0.4}, 11);
  EXPECT_NEAR(std::abs(p.at(0, 0, 0) - eval_psi(ctx, 0, 0.4) / std::sqrt(4 * std::numbers::pi)), 0.0, 1e-15);
}

TEST(Eigenbasis, GeostrophicMode) {
  EigenMode e = build_mode(1.0, {1, 0, 0});
  const double c = 1.0 / std::sqrt(3.0);
  EXPECT_NEAR(e.coeff(0, 0).real(), -1.0 * c, 1e-15);
  EXPECT_NEAR(e.coeff(0, 2).real(), -std::sqrt(0.5) * c, 1e-15);
  EXPECT_NEAR(e.coeff(2, 0).real(), 1.0 * c, 1e-15);
  EXPECT_NEAR(e.coeff(2, 2).real(), -std::sqrt(0.5) * c, 1e-15);
  EXPECT_TRUE(e.coeffs[1].empty());
  EXPECT_EQ(e.tau, 0.0);
}

TEST(Eigenbasis, PoincareModeNormAndResidual) {
  EigenMode e = build_mode(1.0, {1, 1, 1});
  EXPECT_NEAR(e.tau, 2.11491, 1e-5);
  SpectralField f = mode_field(1.0, {1, 1, 1}, 2, 1);
  EXPECT_NEAR(quadrature_norm(f), 1.0, 1e-12);
  SpectralField r = apply_L(f) - cplx(0, e.tau) * f.resized(3, 1);
  EXPECT_LE(r.l2_norm(), 1e-12);
  for (double x : {-1.2, 0.3, 2.0})
    for (cplx v : pointwise_L_residual(1.0, e, x)) EXPECT_LE(std::abs(v), 1e-9);
}

TEST(Eigenbasis, ApplyLExamples) {
  SpectralField kel = mode_field(1.0, {0, 3, 0}, 1, 3);
  SpectralField lk = apply_L(kel);
  EXPECT_LE((lk - cplx(0, 3) * kel.resized(2, 3)).l2_norm(), 1e-14);
  for (int n = 0; n <= 6; ++n) EXPECT_LE(apply_L(mode_field(1.3, {n, 0, 0}, 7, 0)).l2_norm(), 1e-14);
  EigenMode e = build_mode(1.0, {2, 1, -1});
  SpectralField f = mode_field(1.0, {2, 1, -1}, 3, 1);
  EXPECT_LE((apply_L(f) - cplx(0, tau(1.0, 2, 1, -1)) * f.resized(4, 1)).l2_norm(), 1e-9);
  EXPECT_NEAR(e.tau, tau(1.0, 2, 1, -1), 0.0);
}

TEST(Eigenbasis, ApplyLClampPolicy) {
  SpectralField f(1.0, 3, 1);
  f.at(0, 1, 1) = 1.0;
  EXPECT_EQ(apply_L(f, Overflow::Clamp).n_max(), 3);
  f.at(2, 3, 0) = 1.0;
  EXPECT_THROW(apply_L(f, Overflow::Clamp), TruncationOverflow);
  EXPECT_EQ(apply_L(f, Overflow::Grow).n_max(), 4);
}

TEST(Eigenbasis, GramAndResidualOverRange) {
  for (double beta : {1.0, 2.718281828}) {
    Eigenbasis eb(beta, 12, 12);
    double worst_gram = 0.0, worst_res = 0.0;
    for (int k = -12; k <= 12; ++k) {
      std::vector<SpectralField> fs;
      std::vector<double> taus;
      for (int n = 0; n <= 12; ++n)
        for (int j = -1; j <= 1; ++j) {
          fs.push_back(mode_field(beta, {n, k, j}, 13, 12));
          taus.push_back(eb.space().tau(eb.space().index(n, k, j)));
        }
      for (std::size_t a = 0; a < fs.size(); ++a) {
        for (std::size_t b = 0; b < fs.size(); ++b) {
          cplx s{};
          for (std::size_t i = 0; i < fs[a].data().size(); ++i) s += std::conj(fs[a].data()[i]) * fs[b].data()[i];
          worst_gram = std::max(worst_gram, std::abs(s - (a == b ? 1.0 : 0.0)));
        }
        SpectralField r = apply_L(fs[a]) - cplx(0, taus[a]) * fs[a].resized(14, 12);
        worst_res = std::max(worst_res, r.l2_norm());
      }
    }
    EXPECT_LE(worst_gram, 1e-8);
    EXPECT_LE(worst_res, 1e-9);
  }
}

TEST(Eigenbasis, QuadratureNormsOverRange) {
  const double beta = 1.0;
  for (int n : {0, 3, 8, 12})
    for (int k : {-7, 0, 2, 12})
      for (int j = -1; j <= 1; ++j) EXPECT_NEAR(quadrature_norm(mode_field(beta, {n, k, j}, 13, 12)), 1.0, 1e-10);
}

TEST(Eigenbasis, PointwiseEigenRelation) {
  for (double beta : {0.6, 1.9})
    for (int n : {0, 1, 4})
      for (int k : {-2, 0, 3})
        for (int j = -1; j <= 1; ++j) {
          EigenMode e = build_mode(beta, {n, k, j});
          for (double x : {-1.5, 0.2, 1.1})
            for (cplx v : pointwise_L_residual(beta, e, x)) EXPECT_LE(std::abs(v), 1e-8);
        }
}

TEST(Eigenbasis, NoSingularModesAtBetaTwoKSquared) {
  for (int j = -1; j <= 1; ++j) {
    EXPECT_FALSE(is_degenerate(2.0, {0, 1, j}));
    EXPECT_NO_THROW(build_mode(2.0, {0, 1, j}));
    EXPECT_NO_THROW(build_mode(8.0, {0, -2, j}));
  }
  EXPECT_NO_THROW(Eigenbasis(2.0, 3, 2));
  EXPECT_THROW(build_mode(1.0, {0, 1, 2}), InvalidArgument);
}

TEST(Eigenbasis, DecomposeExamples) {
  Eigenbasis eb(1.0, 4, 3);
  SpectralField f = eb.to_field(eb.unit({1, 1, 0}));
  ModeCoefficients mc = eb.decompose(f);
  for (std::size_t i = 0; i < mc.size(); ++i)
    EXPECT_NEAR(std::abs(mc[i] - (i == eb.space().index(1, 1, 0) ? 1.0 : 0.0)), 0.0, 1e-10);
  SpectralField g = f + cplx(2.0) * eb.to_field(eb.unit({0, 2, 0}));
  ModeCoefficients mg = eb.decompose(g);
  EXPECT_NEAR(std::abs(mg.at(1, 1, 0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(mg.at(0, 2, 0) - 2.0), 0.0, 1e-12);
}

TEST(Eigenbasis, RandomFieldRoundTrip) {
  const double beta = 1.3;
  Eigenbasis eb(beta, 9, 8);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  SpectralField f(beta, 8, 8);
  for (auto& v : f.data()) v = cplx(g(rng), g(rng));
  ModeCoefficients mc = eb.decompose(f);
  SpectralField back = eb.to_field(mc).resized(8, 8);
  EXPECT_LE((back - f).l2_norm() / f.l2_norm(), 1e-9);
  EXPECT_NEAR(mc.l2_norm(), f.l2_norm(), 1e-10 * f.l2_norm());
  ModeCoefficients mb = eb.decompose_by_blocks(f);
  for (std::size_t i = 0; i < mc.size(); ++i) EXPECT_NEAR(std::abs(mb[i] - mc[i]), 0.0, 1e-8);
}

TEST(Eigenbasis, DecompositionMatricesInvertible) {
  Eigenbasis eb(2.718281828, 8, 6);
  for (int n = 0; n <= 8; ++n)
    for (int k = -6; k <= 6; ++k) {
      Eigen::Matrix3cd m = eb.decomposition_matrix(n, k);
      Eigen::Matrix3cd inv = m.inverse();
      EXPECT_LE((m * inv - Eigen::Matrix3cd::Identity()).norm(), 1e-9);
      EXPECT_GT(std::abs(m.determinant()), 1e-6);
    }
}

TEST(Eigenbasis, ConjugatePartner) {
  for (int n = 0; n <= 5; ++n)
    for (int k = -4; k <= 4; ++k)
      for (int j = -1; j <= 1; ++j) {
        EigenMode a = build_mode(1.1, {n, k, j});
        EigenMode b = build_mode(1.1, {n, -k, -j});
        for (int c = 0; c < 3; ++c)
          for (int h = 0; h <= n + 1; ++h) EXPECT_EQ(a.coeff(c, h), std::conj(b.coeff(c, h)));
      }
}

TEST(Eigenbasis, ComponentComparability) {
  double worst = 0.0;
  for (double beta : {0.5, 1.0, 2.718281828})
    for (int n = 0; n <= 12; ++n)
      for (int k = -12; k <= 12; ++k)
        for (int j = -1; j <= 1; ++j) {
          if (classify(n, k, j) == WaveClass::Geostrophic || is_degenerate(beta, {n, k, j})) continue;
          EigenMode e = build_mode(beta, {n, k, j});
          double eta = 0.0, u = 0.0;
          for (const auto& [h, v] : e.coeffs[0]) eta += std::norm(v);
          for (int c = 1; c < 3; ++c)
            for (const auto& [h, v] : e.coeffs[c]) u += std::norm(v);
          worst = std::max(worst, std::sqrt(eta / u));
        }
  EXPECT_LE(worst, 10.0);
}

TEST(Eigenbasis, SobolevGrowth) {
  const double beta = 1.0;
  double lo = 1e300, hi = 0.0;
  for (int n = 0; n <= 12; ++n)
    for (int k = -12; k <= 12; ++k)
      for (int j = -1; j <= 1; ++j) {
        SpectralField f = mode_field(beta, {n, k, j}, 13, 12);
        // H1 norm by quadrature of the field and its first derivatives.
        double h1 = std::pow(quadrature_norm(f), 2) + std::pow(quadrature_norm(d1(f)), 2) +
                    std::pow(quadrature_norm(d2(f)), 2);
        double r = std::sqrt(h1 / (1.0 + n + k * k));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
  EXPECT_GT(lo, 0.25);
  EXPECT_LT(hi, 4.0);
}
