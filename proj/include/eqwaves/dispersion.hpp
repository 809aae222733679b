#pragma once

#include <array>
#include <compare>
#include <string_view>

namespace eqw {

enum class WaveClass { Poincare, Rossby, Mixed, Kelvin, Geostrophic };

std::string_view to_string(WaveClass c);

struct ModeIndex {
  int n = 0;
  int k = 0;
  int j = 0;
  auto operator<=>(const ModeIndex&) const = default;
};

struct RootTriple {
  double beta = 1.0;
  int n = 0;
  int k = 0;
  std::array<double, 3> taus{};  // indexed by j+1

  double tau(int j) const { return taus[j + 1]; }
};

// Real roots of t^3 + p t + q, ascending. Requires three real roots.
std::array<double, 3> cubic_real_roots(double p, double q);

RootTriple roots(double beta, int n, int k);
double tau(double beta, int n, int k, int j);

WaveClass classify(int n, int k, int j);

double asymptote_large_beta(int n, int k, int j, double beta);
double asymptote_small_beta(int n, int k, double beta);

}  // namespace eqw
