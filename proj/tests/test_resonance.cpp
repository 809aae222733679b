#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include "eqwaves/dispersion.hpp"
#include "eqwaves/error.hpp"
#include "eqwaves/fields.hpp"
#include "eqwaves/resonance.hpp"

using namespace eqw;

namespace {

double cubic(double beta, int n, int k, double t) {
  return t * t * t - (static_cast<double>(k) * k + beta * (2 * n + 1)) * t - beta * k;
}

// Roots by bracketing the cubic; the n = 0 eigenvalues use the quadratic factor and Kelvin.
std::array<double, 3> oracle_taus(double beta, int n, int k) {
  if (n == 0 && k != 0) {
    double s = std::sqrt(static_cast<double>(k) * k + 4 * beta);
    return {0.5 * (k - s), static_cast<double>(k), 0.5 * (k + s)};
  }
  double w = std::sqrt(static_cast<double>(k) * k + beta * (2 * n + 1)) + 1;
  std::array<double, 3> out{};
  // The middle root lies between -|k| and |k| for n >= 1, and is 0 for k = 0.
  double edges[4] = {-w, -std::abs(k) - 1e-300, std::abs(k) + 1e-300, w};
  if (k == 0) return {-(w - 1), 0.0, w - 1};
  for (int i = 0; i < 3; ++i) {
    double lo = edges[i], hi = edges[i + 1];
    double flo = cubic(beta, n, k, lo);
    for (int it = 0; it < 300; ++it) {
      double mid = 0.5 * (lo + hi);
      double fm = cubic(beta, n, k, mid);
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    out[i] = 0.5 * (lo + hi);
  }
  return out;
}

double oracle_tau(double beta, const ModeIndex& m) { return oracle_taus(beta, m.n, m.k)[m.j + 1]; }

}  // namespace

TEST(Resonance, DefectExamples) {
  for (double beta : {0.5, 1.0, 7.0}) {
    EXPECT_EQ(triad_defect(beta, {0, 1, 0}, {0, 2, 0}, {0, 3, 0}), 0.0);
    EXPECT_EQ(triad_defect(beta, {2, 0, 0}, {0, 3, 0}, {0, 3, 0}), 0.0);
  }
  double d = triad_defect(1.0, {1, 1, 0}, {1, 1, 0}, {1, 2, 0});
  EXPECT_NEAR(d, 2 * oracle_tau(1.0, {1, 1, 0}) - oracle_tau(1.0, {1, 2, 0}), 1e-13);
  EXPECT_NEAR(oracle_tau(1.0, {1, 1, 0}), -0.25410, 1e-5);
  EXPECT_THROW(triad_defect(1.0, {0, 1, 0}, {0, 1, 0}, {0, 3, 0}), InvalidTriad);
}

TEST(Resonance, PolynomialKelvinFactorVanishes) {
  for (double beta : {0.3, 1.0, 5.5}) EXPECT_EQ(p_polynomial(beta, 0, 0, 0, 1, 1), 0.0);
}

TEST(Resonance, PolynomialFactorwiseAndExpansionOracles) {
  const double p = p_polynomial(1.0, 1, 1, 1, 1, 1);
  double factorwise = 1;
  auto ta = oracle_taus(1.0, 1, 1), tc = oracle_taus(1.0, 1, 2);
  for (double x : ta)
    for (double y : ta)
      for (double z : tc) factorwise *= x + y - z;
  EXPECT_NEAR(p / factorwise, 1.0, 1e-9);
  // Product over z equals the monic cubic of the output evaluated at x + y. With integer
  // coefficients at beta = 1 the value is an integer.
  double expanded = 1;
  for (double x : ta)
    for (double y : ta) expanded *= cubic(1.0, 1, 2, x + y);
  EXPECT_NEAR(p / expanded, 1.0, 1e-9);
  EXPECT_NEAR(p, -20155392.0, 1e-6 * 20155392.0);
  EXPECT_NEAR(p, std::round(p), 1e-4 * std::abs(p));
}

TEST(Resonance, PolynomialGrowsLikeBetaSixOrFaster) {
  for (auto [k, ks] : {std::pair{1, 1}, {1, 2}, {2, -1}, {3, 1}, {-2, 5}}) {
    double prev = 0;
    for (double beta : {1e2, 1e4, 1e6}) {
      double r = std::abs(p_polynomial(beta, 1, 1, 0, k, ks)) / std::pow(beta, 6);
      EXPECT_GT(r, 0.0);
      EXPECT_GE(r, prev) << k << "," << ks;
      prev = r;
    }
  }
}

TEST(Resonance, OmegaCoefficients) {
  OmegaCoefficients w = omega_coefficients(1, 1, 0, 1, 1);
  EXPECT_NEAR(w.omega0, -8.0 / 3, 1e-15);
  EXPECT_NEAR(w.omega1, 16.0 / 81, 1e-15);
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m)
      for (int k = -3; k <= 3; ++k) EXPECT_EQ(omega_coefficients(n, n, m, k, -k).omega0, 0.0);
}

TEST(Resonance, OmegaMatchesLargeBetaFit) {
  const int cases[][5] = {{1, 2, 0, 2, 3}, {1, 1, 0, 1, 1}, {2, 1, 3, -1, 2}, {0, 2, 1, 3, -1}, {3, 0, 2, 1, 1}};
  for (auto& c : cases) {
    OmegaCoefficients w = omega_coefficients(c[0], c[1], c[2], c[3], c[4]);
    for (double beta : {1e5, 1e6}) {
      double d = triad_defect(beta, {c[0], c[3], 0}, {c[1], c[4], 0}, {c[2], c[3] + c[4], 0});
      EXPECT_NEAR(d, w.omega0 + w.omega1 / beta, 1e-8);
      if (w.omega1 != 0) EXPECT_NEAR((d - w.omega0) * beta / w.omega1, 1.0, 1e-3);
    }
  }
}

TEST(Resonance, FastModesAsymptoticallyNonResonant) {
  const double beta = 1e8;
  for (int n = 0; n <= 3; ++n)
    for (int ns = 0; ns <= 3; ++ns)
      for (int m = 0; m <= 3; ++m)
        for (int j : {-1, 1})
          for (int js : {-1, 1})
            for (int l : {-1, 1}) {
              double lead = j * std::sqrt(2.0 * n + 1) + js * std::sqrt(2.0 * ns + 1) - l * std::sqrt(2.0 * m + 1);
              if (std::abs(lead) < 1e-12) continue;
              double d = triad_defect(beta, {n, 1, j}, {ns, 2, js}, {m, 3, l});
              // Next order: each fast branch carries + k / (2(2n+1)).
              double next = 1.0 / (2 * (2 * n + 1)) + 2.0 / (2 * (2 * ns + 1)) - 3.0 / (2 * (2 * m + 1));
              EXPECT_NEAR(d - std::sqrt(beta) * lead, next, 1e-3);
              // Where the leading coefficient nearly cancels, the next order dominates longer.
              if (std::abs(lead) >= 0.15) EXPECT_NEAR(d / std::sqrt(beta) / lead, 1.0, 1e-3);
              EXPECT_NEAR(d / std::sqrt(beta) / lead, 1.0, 2e-4 / std::abs(lead));
            }
}

TEST(Resonance, GenericBetaScan) {
  ScanReport r = scan_resonances(std::numbers::e, 6, 6, 1e-9);
  EXPECT_EQ(r.count_accidental, 0u);
  ASSERT_TRUE(r.min_nonexempt.has_value());
  EXPECT_GE(std::abs(r.min_nonexempt->defect), 1e-6);
  EXPECT_EQ(r.min_nonexempt->classification, TriadClass::NonResonant);
  EXPECT_LT(r.max_kelvin_defect, 1e-14);
  EXPECT_GT(r.count_all_kelvin, 0u);
  EXPECT_EQ(r.records.size(), r.count_all_kelvin + r.count_zero_mode);
  EXPECT_TRUE(r.double_roots.empty());
  for (const auto& t : r.records) {
    EXPECT_NE(t.classification, TriadClass::NonResonant);
    EXPECT_EQ(t.c.k, t.a.k + t.b.k);
  }
}

TEST(Resonance, KelvinSectorIsTheConvolutionSet) {
  const int K = 5;
  ScanReport r = scan_resonances(1.7, 3, K, 1e-9, Sector::Kelvin);
  std::set<std::tuple<int, int>> expect;
  for (int k1 = -K; k1 <= K; ++k1)
    for (int k2 = -K; k2 <= K; ++k2)
      if (k1 != 0 && k2 != 0 && k1 + k2 != 0 && std::abs(k1 + k2) <= K) expect.insert({k1, k2});
  std::set<std::tuple<int, int>> got;
  for (const auto& t : r.records) {
    EXPECT_EQ(t.classification, TriadClass::AllKelvin);
    EXPECT_EQ(t.defect, 0.0);
    got.insert({t.a.k, t.b.k});
  }
  EXPECT_EQ(got, expect);
  EXPECT_EQ(r.records.size(), expect.size());
}

TEST(Resonance, ScanMatchesBruteForce) {
  const double beta = 1.3;
  const int N = 3, K = 3;
  ScanReport r = scan_resonances(beta, N, K, 1e-9);
  std::set<std::tuple<ModeIndex, ModeIndex, ModeIndex>> brute;
  double best = INFINITY;
  for (int n1 = 0; n1 <= N; ++n1)
    for (int k1 = -K; k1 <= K; ++k1)
      for (int j1 = -1; j1 <= 1; ++j1)
        for (int n2 = 0; n2 <= N; ++n2)
          for (int k2 = -K; k2 <= K; ++k2)
            for (int j2 = -1; j2 <= 1; ++j2)
              for (int m = 0; m <= N; ++m)
                for (int l = -1; l <= 1; ++l) {
                  if (std::abs(k1 + k2) > K) continue;
                  ModeIndex a{n1, k1, j1}, b{n2, k2, j2}, c{m, k1 + k2, l};
                  double ta = oracle_tau(beta, a), tb = oracle_tau(beta, b), tc = oracle_tau(beta, c);
                  double d = ta + tb - tc;
                  if (std::abs(d) < 1e-9 * std::max(1.0, std::abs(ta) + std::abs(tb) + std::abs(tc)))
                    brute.insert({a, b, c});
                  bool kel = n1 == 0 && n2 == 0 && m == 0 && j1 == 0 && j2 == 0 && l == 0 && k1 != 0 && k2 != 0 &&
                             k1 + k2 != 0;
                  bool zero = (k1 == 0 && j1 == 0) || (k2 == 0 && j2 == 0) || (k1 + k2 == 0 && l == 0);
                  if (!kel && !zero) best = std::min(best, std::abs(d));
                }
  std::set<std::tuple<ModeIndex, ModeIndex, ModeIndex>> got;
  for (const auto& t : r.records) got.insert({t.a, t.b, t.c});
  EXPECT_EQ(got, brute);
  ASSERT_TRUE(r.min_nonexempt.has_value());
  EXPECT_NEAR(std::abs(r.min_nonexempt->defect), best, 1e-12);
}

TEST(Resonance, CubicDoubleRootReportedAtBetaTwo) {
  ScanReport r = scan_resonances(2.0, 2, 2, 1e-9);
  std::vector<std::pair<int, int>> expect{{0, -1}, {0, 1}};
  EXPECT_EQ(r.double_roots, expect);
  EXPECT_EQ(r.count_accidental, 0u);
}

TEST(Resonance, ResonantSetMembership) {
  auto space = std::make_shared<ModeSpace>(std::numbers::e, 4, 4);
  ResonantSet rs(*space);
  EXPECT_EQ(rs.size(), rs.records().size());
  EXPECT_TRUE(rs.contains(space->index(0, 1, 0), space->index(0, 2, 0), space->index(0, 3, 0)));
  EXPECT_TRUE(rs.contains(space->index(2, 0, 0), space->index(1, 3, 1), space->index(1, 3, 1)));
  EXPECT_FALSE(rs.contains(space->index(1, 1, 0), space->index(1, 1, 0), space->index(1, 2, 0)));
  EXPECT_NO_THROW(rs.check_compatible(*space));
  EXPECT_THROW(rs.check_compatible(ModeSpace(2.0, 4, 4)), ConfigurationError);
  EXPECT_THROW(rs.check_compatible(ModeSpace(std::numbers::e, 5, 4)), ConfigurationError);
}

TEST(Resonance, SectorNames) {
  EXPECT_EQ(parse_sector("kelvin"), Sector::Kelvin);
  EXPECT_EQ(to_string(parse_sector("rossby")), "rossby");
  EXPECT_THROW(parse_sector("bogus"), InvalidArgument);
  EXPECT_EQ(to_string(TriadClass::AllKelvin), "all-Kelvin");
}
