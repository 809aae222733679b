#include "eqwaves/fields.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "eqwaves/error.hpp"

namespace eqw {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

void check_same(const SpectralField& a, const SpectralField& b) {
  if (!a.same_shape(b)) throw TruncationMismatch("spectral fields have different windows");
}

void check_same(const ModeCoefficients& a, const ModeCoefficients& b) {
  if (!a.compatible(b)) throw TruncationMismatch("mode coefficients live on different mode spaces");
}

// Shared kernel of d1 and beta_x1: sign = -1 for the derivative, +1 for x-multiplication.
SpectralField shift_pair(const SpectralField& f, double sign) {
  SpectralField out(f.beta(), f.n_max() + 1, f.k_max(), f.is_real());
  const double a = std::sqrt(f.beta() / 2.0);
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m <= out.n_max(); ++m)
      for (int k = -f.k_max(); k <= f.k_max(); ++k) {
        cplx up = f.get(c, m + 1, k) * std::sqrt(m + 1.0);
        cplx dn = f.get(c, m - 1, k) * std::sqrt(static_cast<double>(m));
        out.at(c, m, k) = a * (up + sign * dn);
      }
  return out;
}

}  // namespace

SpectralField::SpectralField(double beta, int n_max, int k_max, bool real)
    : beta_(beta), n_max_(n_max), k_max_(k_max), real_(real) {
  if (n_max < 0 || k_max < 0) throw InvalidArgument("negative truncation");
  c_.assign(3 * static_cast<std::size_t>(n_max + 1) * (2 * k_max + 1), cplx{});
}

cplx SpectralField::get(int comp, int n, int k) const {
  if (n < 0 || n > n_max_ || k < -k_max_ || k > k_max_) return {};
  return c_[index(comp, n, k)];
}

double SpectralField::l2_norm() const {
  double s = 0.0;
  for (const auto& v : c_) s += std::norm(v);
  return std::sqrt(s);
}

void SpectralField::enforce_reality() {
  real_ = true;
  for (int c = 0; c < 3; ++c)
    for (int n = 0; n <= n_max_; ++n) {
      at(c, n, 0) = at(c, n, 0).real();
      for (int k = 1; k <= k_max_; ++k) {
        cplx v = 0.5 * (at(c, n, k) + std::conj(at(c, n, -k)));
        at(c, n, k) = v;
        at(c, n, -k) = std::conj(v);
      }
    }
}

SpectralField SpectralField::resized(int n_max, int k_max) const {
  SpectralField out(beta_, n_max, k_max, real_);
  for (int c = 0; c < 3; ++c)
    for (int n = 0; n <= std::min(n_max, n_max_); ++n)
      for (int k = -std::min(k_max, k_max_); k <= std::min(k_max, k_max_); ++k) out.at(c, n, k) = at(c, n, k);
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  real_ = real_ && o.real_;
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  real_ = real_ && o.real_;
  return *this;
}

SpectralField& SpectralField::operator*=(cplx a) {
  for (auto& v : c_) v *= a;
  if (a.imag() != 0.0) real_ = false;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

SpectralField d1(const SpectralField& f) { return shift_pair(f, -1.0); }
SpectralField beta_x1(const SpectralField& f) { return shift_pair(f, 1.0); }

SpectralField d2(const SpectralField& f) {
  SpectralField out = f;
  for (int c = 0; c < 3; ++c)
    for (int n = 0; n <= f.n_max(); ++n)
      for (int k = -f.k_max(); k <= f.k_max(); ++k) out.at(c, n, k) *= cplx(0.0, k);
  return out;
}

SpectralField d11(const SpectralField& f) { return d1(d1(f)); }

ModeSpace::ModeSpace(double beta, int n_max, int k_max) : beta_(beta), n_max_(n_max), k_max_(k_max) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  if (n_max < 0 || k_max < 0) throw InvalidArgument("negative truncation");
  std::size_t m = 3 * static_cast<std::size_t>(n_max + 1) * (2 * k_max + 1);
  tau_.resize(m);
  cls_.resize(m);
  for (int k = -k_max; k <= k_max; ++k)
    for (int n = 0; n <= n_max; ++n) {
      RootTriple r = roots(beta, n, k);
      for (int j = -1; j <= 1; ++j) {
        tau_[index(n, k, j)] = r.tau(j);
        cls_[index(n, k, j)] = classify(n, k, j);
      }
    }
}

ModeIndex ModeSpace::mode(std::size_t i) const {
  int j = static_cast<int>(i % 3) - 1;
  std::size_t r = i / 3;
  int n = static_cast<int>(r % (n_max_ + 1));
  int k = static_cast<int>(r / (n_max_ + 1)) - k_max_;
  return {n, k, j};
}

std::size_t ModeSpace::partner(std::size_t i) const {
  ModeIndex m = mode(i);
  return index(m.n, -m.k, -m.j);
}

ModeCoefficients::ModeCoefficients(std::shared_ptr<const ModeSpace> space, bool real)
    : space_(std::move(space)), real_(real) {
  if (!space_) throw InvalidArgument("null mode space");
  phi_.assign(space_->size(), cplx{});
}

double ModeCoefficients::l2_norm() const {
  double s = 0.0;
  for (const auto& v : phi_) s += std::norm(v);
  return std::sqrt(s);
}

void ModeCoefficients::enforce_reality() {
  real_ = true;
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    std::size_t p = space_->partner(i);
    if (p < i) continue;
    if (p == i) {
      phi_[i] = phi_[i].real();
      continue;
    }
    cplx v = 0.5 * (phi_[i] + std::conj(phi_[p]));
    phi_[i] = v;
    phi_[p] = std::conj(v);
  }
}

ModeCoefficients& ModeCoefficients::operator+=(const ModeCoefficients& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < phi_.size(); ++i) phi_[i] += o.phi_[i];
  real_ = real_ && o.real_;
  return *this;
}

ModeCoefficients& ModeCoefficients::operator-=(const ModeCoefficients& o) {
  check_same(*this, o);
  for (std::size_t i = 0; i < phi_.size(); ++i) phi_[i] -= o.phi_[i];
  real_ = real_ && o.real_;
  return *this;
}

ModeCoefficients& ModeCoefficients::operator*=(cplx a) {
  for (auto& v : phi_) v *= a;
  if (a.imag() != 0.0) real_ = false;
  return *this;
}

ModeCoefficients operator+(ModeCoefficients a, const ModeCoefficients& b) { return a += b; }
ModeCoefficients operator-(ModeCoefficients a, const ModeCoefficients& b) { return a -= b; }
ModeCoefficients operator*(cplx s, ModeCoefficients a) { return a *= s; }

cplx inner(const ModeCoefficients& a, const ModeCoefficients& b) {
  check_same(a, b);
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

ModeCoefficients random_modes(std::shared_ptr<const ModeSpace> space, std::uint64_t seed, bool real, double decay) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ModeCoefficients mc(space, false);
  for (std::size_t i = 0; i < mc.size(); ++i) {
    ModeIndex m = space->mode(i);
    const double w = std::pow(1.0 + m.n + double(m.k) * m.k, -decay);
    const double re = g(rng);
    const double im = g(rng);
    mc[i] = w * cplx(re, im);
  }
  if (real) mc.enforce_reality();
  return mc;
}

double hl_norm(const ModeCoefficients& mc, double s) {
  if (s < 0) throw InvalidArgument("negative Sobolev index");
  const ModeSpace& sp = mc.space();
  double acc = 0.0;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    if (mc[i] == cplx{}) continue;
    ModeIndex m = sp.mode(i);
    acc += std::pow(1.0 + m.n + static_cast<double>(m.k) * m.k, s) * std::norm(mc[i]);
  }
  return std::sqrt(acc);
}

double tau_weighted_norm(const ModeCoefficients& mc, double s) {
  if (s < 0) throw InvalidArgument("negative Sobolev index");
  const ModeSpace& sp = mc.space();
  double acc = 0.0;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    if (mc[i] == cplx{}) continue;
    double t = sp.tau(i);
    acc += std::pow(1.0 + t * t, s) * std::norm(mc[i]);
  }
  return std::sqrt(acc);
}

ModeCoefficients project(const ModeCoefficients& mc, WaveClass cls) {
  ModeCoefficients out = mc;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mc.space().wave_class(i) != cls) out[i] = cplx{};
  return out;
}

ModeCoefficients filter(const ModeCoefficients& mc, double t) {
  ModeCoefficients out = mc;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double ph = -t * mc.space().tau(i);
    out[i] *= cplx(std::cos(ph), std::sin(ph));
  }
  return out;
}

PhysicalField synthesize(const SpectralField& field, std::span<const double> x1_nodes, int x2_count) {
  if (x2_count < 2 * field.k_max() + 1)
    throw ResolutionError("x2 grid of " + std::to_string(x2_count) + " points cannot resolve |k| <= " +
                          std::to_string(field.k_max()));
  for (double x : x1_nodes)
    if (!std::isfinite(x)) throw InvalidArgument("non-finite x1 node");
  const int N = field.n_max();
  const int K = field.k_max();
  const int nk = 2 * K + 1;
  PhysicalField p;
  p.x1.assign(x1_nodes.begin(), x1_nodes.end());
  p.x2_count = x2_count;
  p.values.assign(3 * p.x1.size() * x2_count, cplx{});
  std::vector<cplx> twiddle(static_cast<std::size_t>(nk) * x2_count);
  for (int k = -K; k <= K; ++k)
    for (int m = 0; m < x2_count; ++m) {
      double ph = 2 * std::numbers::pi * k * m / x2_count;
      twiddle[(k + K) * x2_count + m] = cplx(std::cos(ph), std::sin(ph));
    }
  std::vector<double> psi(N + 1);
  std::vector<cplx> g(nk);
  for (std::size_t i = 0; i < p.x1.size(); ++i) {
    eval_psi_all(field.beta(), N, p.x1[i], psi);
    for (int c = 0; c < 3; ++c) {
      for (int k = -K; k <= K; ++k) {
        cplx s{};
        for (int n = 0; n <= N; ++n) s += field.at(c, n, k) * psi[n];
        g[k + K] = s * kInvSqrt2Pi;
      }
      for (int m = 0; m < x2_count; ++m) {
        cplx s{};
        for (int k = 0; k < nk; ++k) s += g[k] * twiddle[k * x2_count + m];
        p.at(c, i, m) = s;
      }
    }
  }
  return p;
}

SpectralField analyze(const PhysicalField& phys, const QuadratureRule& rule, double beta, int n_max, int k_max,
                      bool real) {
  if (phys.x1.size() != rule.size()) throw InvalidArgument("x1 grid does not match quadrature rule");
  if (phys.x2_count < 2 * k_max + 1) throw ResolutionError("x2 grid too coarse for requested wavenumbers");
  if (static_cast<int>(rule.size()) < n_max + 1) throw ResolutionError("too few x1 nodes for requested Hermite window");
  const int M = phys.x2_count;
  const int nk = 2 * k_max + 1;
  SpectralField out(beta, n_max, k_max, real);
  std::vector<cplx> twiddle(static_cast<std::size_t>(nk) * M);
  for (int k = -k_max; k <= k_max; ++k)
    for (int m = 0; m < M; ++m) {
      double ph = -2 * std::numbers::pi * k * m / M;
      twiddle[(k + k_max) * M + m] = cplx(std::cos(ph), std::sin(ph));
    }
  std::vector<double> psi(n_max + 1);
  // 2 pi / M from the x2 sum and (2 pi)^{-1/2} from the basis normalization.
  const double fac = 2 * std::numbers::pi / M * kInvSqrt2Pi;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    eval_psi_all(beta, n_max, rule.nodes[i], psi);
    const double w = rule.full_weights[i] * fac;
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < nk; ++k) {
        cplx s{};
        for (int m = 0; m < M; ++m) s += phys.at(c, i, m) * twiddle[k * M + m];
        s *= w;
        for (int n = 0; n <= n_max; ++n) out.at(c, n, k - k_max) += s * psi[n];
      }
  }
  if (real) out.enforce_reality();
  return out;
}

}  // namespace eqw
