#include "eqwaves/eigenbasis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqwaves/error.hpp"

namespace eqw {

namespace {

std::string describe(const ModeIndex& m) {
  return "(" + std::to_string(m.n) + "," + std::to_string(m.k) + "," + std::to_string(m.j) + ")";
}

}  // namespace

cplx EigenMode::coeff(int comp, int n) const {
  for (const auto& [h, v] : coeffs[comp])
    if (h == n) return v;
  return {};
}

// The eigenvector coefficients divide by tau - k and (for n >= 1) tau + k. For the
// exact spectrum neither vanishes when beta > 0; this guards against roundoff.
bool is_degenerate(double beta, const ModeIndex& m) {
  if (m.j == 0 && (m.k == 0 || m.n == 0)) return false;
  const double t = tau(beta, m.n, m.k, m.j);
  const double scale = 1e-12 * std::max({1.0, std::abs(t), std::abs(double(m.k))});
  if (std::abs(t - m.k) <= scale) return true;
  return m.n >= 1 && std::abs(t + m.k) <= scale;
}

EigenMode build_mode(double beta, const ModeIndex& m) {
  if (m.n < 0 || m.j < -1 || m.j > 1) throw InvalidArgument("invalid mode index " + describe(m));
  if (is_degenerate(beta, m))
    throw DegenerateSpectrum("eigenvector of mode " + describe(m) + " is singular (tau = +-k)");
  EigenMode e;
  e.index = m;
  e.tau = tau(beta, m.n, m.k, m.j);
  const int n = m.n;
  if (m.j == 0 && (m.k == 0 || n == 0)) {
    if (n == 0) {
      const double h = 1.0 / std::sqrt(2.0);
      e.coeffs[0] = {{0, h}};
      e.coeffs[2] = {{0, h}};
      return e;
    }
    const double c = 1.0 / std::sqrt(2.0 * n + 1.0);
    const double lo = std::sqrt((n + 1) / 2.0) * c;
    const double hi = std::sqrt(n / 2.0) * c;
    e.coeffs[0] = {{n - 1, -lo}, {n + 1, -hi}};
    e.coeffs[2] = {{n - 1, lo}, {n + 1, -hi}};
    return e;
  }
  const double t = e.tau;
  const double k = m.k;
  const double a_lo = std::sqrt(beta * n / 2.0) / (t + k);
  const double a_hi = std::sqrt(beta * (n + 1) / 2.0) / (t - k);
  const double c = 1.0 / std::sqrt(2 * a_lo * a_lo + 2 * a_hi * a_hi + 1.0);
  const cplx I(0.0, 1.0);
  if (n > 0) {
    e.coeffs[0].push_back({n - 1, -I * a_lo * c});
    e.coeffs[2].push_back({n - 1, I * a_lo * c});
  }
  e.coeffs[0].push_back({n + 1, I * a_hi * c});
  e.coeffs[2].push_back({n + 1, I * a_hi * c});
  e.coeffs[1] = {{n, cplx(c, 0.0)}};
  return e;
}

EigenMode build_mode(const HermiteContext& ctx, const ModeIndex& m) { return build_mode(ctx.beta(), m); }

SpectralField apply_L(const SpectralField& f, Overflow policy) {
  if (policy == Overflow::Clamp) {
    for (int c = 0; c < 3; ++c)
      for (int k = -f.k_max(); k <= f.k_max(); ++k)
        if (f.at(c, f.n_max(), k) != cplx{})
          throw TruncationOverflow("applying L would spill past hermite index " + std::to_string(f.n_max()));
  }
  SpectralField dx = d1(f);
  SpectralField bx = beta_x1(f);
  SpectralField dy = d2(f).resized(f.n_max() + 1, f.k_max());
  SpectralField out(f.beta(), f.n_max() + 1, f.k_max(), f.is_real());
  for (int n = 0; n <= out.n_max(); ++n)
    for (int k = -f.k_max(); k <= f.k_max(); ++k) {
      out.at(0, n, k) = dx.at(1, n, k) + dy.at(2, n, k);
      out.at(1, n, k) = bx.at(2, n, k) + dx.at(0, n, k);
      out.at(2, n, k) = -bx.at(1, n, k) + dy.at(0, n, k);
    }
  if (policy == Overflow::Clamp) return out.resized(f.n_max(), f.k_max());
  return out;
}

Eigenbasis::Eigenbasis(double beta, int n_max, int k_max)
    : space_(std::make_shared<const ModeSpace>(beta, n_max, k_max)) {
  modes_.reserve(space_->size());
  for (std::size_t i = 0; i < space_->size(); ++i) modes_.push_back(build_mode(beta, space_->mode(i)));
}

ModeCoefficients Eigenbasis::unit(const ModeIndex& m) const {
  ModeCoefficients mc(space_);
  mc.at(m.n, m.k, m.j) = 1.0;
  return mc;
}

SpectralField Eigenbasis::to_field(const ModeCoefficients& mc) const {
  if (!mc.space().same_as(*space_)) throw TruncationMismatch("coefficients belong to another eigenbasis");
  SpectralField f(beta(), n_max() + 1, k_max(), mc.is_real());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    if (mc[i] == cplx{}) continue;
    const EigenMode& e = modes_[i];
    for (int c = 0; c < 3; ++c)
      for (const auto& [h, v] : e.coeffs[c]) f.at(c, h, e.k()) += mc[i] * v;
  }
  if (mc.is_real()) f.enforce_reality();
  return f;
}

ModeCoefficients Eigenbasis::decompose(const SpectralField& f) const {
  if (f.n_max() > n_max() + 1 || f.k_max() > k_max())
    throw TruncationMismatch("field window exceeds the eigenbasis truncation");
  ModeCoefficients mc(space_, f.is_real());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const EigenMode& e = modes_[i];
    cplx s{};
    for (int c = 0; c < 3; ++c)
      for (const auto& [h, v] : e.coeffs[c]) s += std::conj(v) * f.get(c, h, e.k());
    mc[i] = s;
  }
  if (f.is_real()) mc.enforce_reality();
  return mc;
}

Eigen::Matrix3cd Eigenbasis::decomposition_matrix(int n, int k) const {
  Eigen::Matrix3cd m;
  for (int j = -1; j <= 1; ++j) {
    const EigenMode& e = modes_[space_->index(n, k, j)];
    cplx first = n == 0 ? 0.5 * (e.coeff(0, 0) + e.coeff(2, 0)) : 0.5 * (e.coeff(0, n - 1) - e.coeff(2, n - 1));
    m(0, j + 1) = first;
    m(1, j + 1) = e.coeff(1, n);
    m(2, j + 1) = 0.5 * (e.coeff(0, n + 1) + e.coeff(2, n + 1));
  }
  return m;
}

ModeCoefficients Eigenbasis::decompose_by_blocks(const SpectralField& f) const {
  if (f.n_max() > n_max() + 1 || f.k_max() > k_max())
    throw TruncationMismatch("field window exceeds the eigenbasis truncation");
  ModeCoefficients mc(space_, f.is_real());
  for (int k = -k_max(); k <= k_max(); ++k)
    for (int n = 0; n <= n_max(); ++n) {
      Eigen::Vector3cd b;
      b[0] = n == 0 ? 0.5 * (f.get(0, 0, k) + f.get(2, 0, k)) : 0.5 * (f.get(0, n - 1, k) - f.get(2, n - 1, k));
      b[1] = f.get(1, n, k);
      b[2] = 0.5 * (f.get(0, n + 1, k) + f.get(2, n + 1, k));
      Eigen::Vector3cd x = decomposition_matrix(n, k).partialPivLu().solve(b);
      for (int j = -1; j <= 1; ++j) mc.at(n, k, j) = x[j + 1];
    }
  if (f.is_real()) mc.enforce_reality();
  return mc;
}

}  // namespace eqw
