#include "eqwaves/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eqwaves/error.hpp"

namespace eqw {

namespace {

double polish(double t, double p, double q) {
  for (int it = 0; it < 5; ++it) {
    double f = (t * t + p) * t + q;
    if (std::abs(f) <= 1e-13 * (1 + std::abs(t * t * t))) break;
    double d = 3 * t * t + p;
    if (d == 0.0) break;
    t -= f / d;
  }
  return t;
}

// Roots for q >= 0.
std::array<double, 3> cubic_nonneg_q(double p, double q) {
  if (p == 0.0 && q == 0.0) return {0.0, 0.0, 0.0};
  double r = std::sqrt(-p / 3.0);
  double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
  double theta = std::acos(arg);
  double hi = 2 * r * std::cos(theta / 3);
  double lo = 2 * r * std::cos(theta / 3 - 4 * std::numbers::pi / 3);
  hi = polish(hi, p, q);
  lo = polish(lo, p, q);
  double mid = q == 0.0 ? 0.0 : polish(-q / (lo * hi), p, q);
  std::array<double, 3> out{lo, mid, hi};
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string_view to_string(WaveClass c) {
  switch (c) {
    case WaveClass::Poincare: return "Poincare";
    case WaveClass::Rossby: return "Rossby";
    case WaveClass::Mixed: return "Mixed";
    case WaveClass::Kelvin: return "Kelvin";
    case WaveClass::Geostrophic: return "Geostrophic";
  }
  return "?";
}

std::array<double, 3> cubic_real_roots(double p, double q) {
  if (!std::isfinite(p) || !std::isfinite(q)) throw InvalidArgument("non-finite cubic coefficients");
  if (4 * p * p * p + 27 * q * q > 1e-12 * (std::abs(4 * p * p * p) + 27 * q * q + 1e-300))
    throw InvalidArgument("cubic does not have three real roots");
  if (q >= 0) return cubic_nonneg_q(p, q);
  auto r = cubic_nonneg_q(p, -q);
  return {-r[2], -r[1], -r[0]};
}

RootTriple roots(double beta, int n, int k) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  if (n < 0) throw InvalidArgument("negative hermite index");
  RootTriple out;
  out.beta = beta;
  out.n = n;
  out.k = k;
  if (k < 0) {
    RootTriple m = roots(beta, n, -k);
    out.taus = {-m.taus[2], -m.taus[1], -m.taus[0]};
    return out;
  }
  if (k == 0) {
    double w = std::sqrt(beta * (2 * n + 1));
    out.taus = {-w, 0.0, w};
    return out;
  }
  const double kk = k;
  if (n == 0) {
    double s = std::sqrt(kk * kk + 4 * beta);
    out.taus = {-2 * beta / (s + kk), kk, 0.5 * (kk + s)};
    return out;
  }
  // t^3 - (k^2 + (2n+1)beta) t - beta k; solve the mirrored cubic with q >= 0.
  auto r = cubic_nonneg_q(-(kk * kk + beta * (2 * n + 1)), beta * kk);
  out.taus = {-r[2], -r[1], -r[0]};
  return out;
}

double tau(double beta, int n, int k, int j) {
  if (j < -1 || j > 1) throw InvalidArgument("branch index must be -1, 0 or 1");
  return roots(beta, n, k).tau(j);
}

WaveClass classify(int n, int k, int j) {
  if (j < -1 || j > 1 || n < 0) throw InvalidArgument("invalid mode index");
  if (j == 0) {
    if (k == 0) return WaveClass::Geostrophic;
    return n == 0 ? WaveClass::Kelvin : WaveClass::Rossby;
  }
  if (n >= 1 || k == 0) return WaveClass::Poincare;
  return j == (k > 0 ? -1 : 1) ? WaveClass::Mixed : WaveClass::Poincare;
}

double asymptote_large_beta(int n, int k, int j, double beta) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  const double m = 2 * n + 1;
  const double kk = k;
  if (j == 0) {
    if (n == 0) return kk;
    return -kk / m + 4.0 * n * (n + 1) * kk * kk * kk / (m * m * m * m * beta);
  }
  return j * std::sqrt(m * beta) + kk / (2 * m);
}

double asymptote_small_beta(int n, int k, double beta) {
  if (k == 0) throw InvalidArgument("small-beta Rossby asymptote needs k != 0");
  if (n < 1) throw InvalidArgument("small-beta Rossby asymptote needs n >= 1");
  return -beta / k;
}

}  // namespace eqw
