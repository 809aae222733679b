#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "eqwaves/dispersion.hpp"
#include "eqwaves/hermite.hpp"

namespace eqw {

using cplx = std::complex<double>;

// Hermite-Fourier coefficients of (eta, u1, u2) on the basis
// psi_n(x1) e^{i k x2} / sqrt(2 pi), so the Euclidean norm is the L2 norm.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(double beta, int n_max, int k_max, bool real = false);

  double beta() const { return beta_; }
  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }
  bool is_real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  std::size_t index(int comp, int n, int k) const {
    return (static_cast<std::size_t>(comp) * (n_max_ + 1) + n) * (2 * k_max_ + 1) + (k + k_max_);
  }
  cplx& at(int comp, int n, int k) { return c_[index(comp, n, k)]; }
  const cplx& at(int comp, int n, int k) const { return c_[index(comp, n, k)]; }
  // Zero outside the stored window.
  cplx get(int comp, int n, int k) const;

  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  double l2_norm() const;
  void enforce_reality();
  // Copy into a different window; dropped coefficients are discarded.
  SpectralField resized(int n_max, int k_max) const;
  bool same_shape(const SpectralField& o) const {
    return n_max_ == o.n_max_ && k_max_ == o.k_max_ && beta_ == o.beta_;
  }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx a);

 private:
  double beta_ = 1.0;
  int n_max_ = 0;
  int k_max_ = 0;
  bool real_ = false;
  std::vector<cplx> c_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx s, SpectralField a);

// Coefficient-space derivatives and multiplication by beta*x1 on a scalar
// component. The Hermite window of the result grows by one (two for d11).
SpectralField d1(const SpectralField& f);
SpectralField d2(const SpectralField& f);
SpectralField beta_x1(const SpectralField& f);
SpectralField d11(const SpectralField& f);

// Mode bookkeeping for the truncation n <= n_max, |k| <= k_max, j in {-1,0,1}.
class ModeSpace {
 public:
  ModeSpace(double beta, int n_max, int k_max);

  double beta() const { return beta_; }
  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }
  std::size_t size() const { return tau_.size(); }

  std::size_t index(int n, int k, int j) const {
    return ((static_cast<std::size_t>(k + k_max_)) * (n_max_ + 1) + n) * 3 + (j + 1);
  }
  std::size_t index(const ModeIndex& m) const { return index(m.n, m.k, m.j); }
  ModeIndex mode(std::size_t i) const;
  bool contains(int n, int k) const { return n >= 0 && n <= n_max_ && k >= -k_max_ && k <= k_max_; }
  double tau(std::size_t i) const { return tau_[i]; }
  WaveClass wave_class(std::size_t i) const { return cls_[i]; }
  // Index of (n, -k, -j), whose mode is the complex conjugate of mode i.
  std::size_t partner(std::size_t i) const;
  bool same_as(const ModeSpace& o) const {
    return beta_ == o.beta_ && n_max_ == o.n_max_ && k_max_ == o.k_max_;
  }
  const std::vector<double>& taus() const { return tau_; }

 private:
  double beta_;
  int n_max_;
  int k_max_;
  std::vector<double> tau_;
  std::vector<WaveClass> cls_;
};

class ModeCoefficients {
 public:
  ModeCoefficients() = default;
  explicit ModeCoefficients(std::shared_ptr<const ModeSpace> space, bool real = false);

  const ModeSpace& space() const { return *space_; }
  const std::shared_ptr<const ModeSpace>& space_ptr() const { return space_; }
  bool is_real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  cplx& operator[](std::size_t i) { return phi_[i]; }
  const cplx& operator[](std::size_t i) const { return phi_[i]; }
  cplx& at(int n, int k, int j) { return phi_[space_->index(n, k, j)]; }
  const cplx& at(int n, int k, int j) const { return phi_[space_->index(n, k, j)]; }
  std::size_t size() const { return phi_.size(); }
  std::vector<cplx>& data() { return phi_; }
  const std::vector<cplx>& data() const { return phi_; }

  double l2_norm() const;
  void enforce_reality();
  bool compatible(const ModeCoefficients& o) const { return space_->same_as(*o.space_); }

  ModeCoefficients& operator+=(const ModeCoefficients& o);
  ModeCoefficients& operator-=(const ModeCoefficients& o);
  ModeCoefficients& operator*=(cplx a);

 private:
  std::shared_ptr<const ModeSpace> space_;
  bool real_ = false;
  std::vector<cplx> phi_;
};

ModeCoefficients operator+(ModeCoefficients a, const ModeCoefficients& b);
ModeCoefficients operator-(ModeCoefficients a, const ModeCoefficients& b);
ModeCoefficients operator*(cplx s, ModeCoefficients a);
// Sum of conj(a_i) b_i.
cplx inner(const ModeCoefficients& a, const ModeCoefficients& b);

// Seeded i.i.d. complex Gaussian coefficients damped by (1+n+k^2)^(-decay).
// Real fields are conjugate-symmetrized.
ModeCoefficients random_modes(std::shared_ptr<const ModeSpace> space, std::uint64_t seed, bool real = true,
                              double decay = 2.0);

double hl_norm(const ModeCoefficients& mc, double s);
double tau_weighted_norm(const ModeCoefficients& mc, double s);
ModeCoefficients project(const ModeCoefficients& mc, WaveClass cls);
ModeCoefficients filter(const ModeCoefficients& mc, double t);

// Field values on the tensor grid x1_nodes x {2 pi m / x2_count}.
struct PhysicalField {
  std::vector<double> x1;
  int x2_count = 0;
  std::vector<cplx> values;  // (comp, i1, m)

  cplx& at(int comp, std::size_t i, int m) { return values[(comp * x1.size() + i) * x2_count + m]; }
  const cplx& at(int comp, std::size_t i, int m) const { return values[(comp * x1.size() + i) * x2_count + m]; }
};

PhysicalField synthesize(const SpectralField& field, std::span<const double> x1_nodes, int x2_count);
// Inverse of synthesize with quadrature rule `rule` in x1 and a DFT in x2.
SpectralField analyze(const PhysicalField& phys, const QuadratureRule& rule, double beta, int n_max, int k_max,
                      bool real = false);

}  // namespace eqw
