#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "eqwaves/fields.hpp"

namespace eqw {

// Hermite-Fourier coefficients of one normalized eigenvector of L.
struct EigenMode {
  ModeIndex index;
  double tau = 0.0;
  // (hermite index, coefficient) per component eta, u1, u2.
  std::array<std::vector<std::pair<int, cplx>>, 3> coeffs;

  int k() const { return index.k; }
  cplx coeff(int comp, int n) const;
};

// True when (n, k, j) has no usable eigenvector formula at this beta.
bool is_degenerate(double beta, const ModeIndex& m);

EigenMode build_mode(double beta, const ModeIndex& m);
EigenMode build_mode(const HermiteContext& ctx, const ModeIndex& m);

enum class Overflow { Grow, Clamp };

SpectralField apply_L(const SpectralField& f, Overflow policy = Overflow::Grow);

class Eigenbasis {
 public:
  Eigenbasis(double beta, int n_max, int k_max);

  const std::shared_ptr<const ModeSpace>& space_ptr() const { return space_; }
  const ModeSpace& space() const { return *space_; }
  double beta() const { return space_->beta(); }
  int n_max() const { return space_->n_max(); }
  int k_max() const { return space_->k_max(); }
  const EigenMode& mode(std::size_t i) const { return modes_[i]; }

  // Field with Hermite window n_max+1.
  SpectralField to_field(const ModeCoefficients& mc) const;
  // Inner products against every mode. The field must fit in n <= n_max+1, |k| <= k_max.
  ModeCoefficients decompose(const SpectralField& f) const;
  // Same result through the 3x3 block solves.
  ModeCoefficients decompose_by_blocks(const SpectralField& f) const;
  // Columns are the modes j=-1,0,1 of block (n,k) in the coordinates
  // ((eta-u2)/2 at n-1, u1 at n, (eta+u2)/2 at n+1); for n = 0 the first
  // coordinate is (eta+u2)/2 at 0.
  Eigen::Matrix3cd decomposition_matrix(int n, int k) const;

  ModeCoefficients zero(bool real = false) const { return ModeCoefficients(space_, real); }
  ModeCoefficients unit(const ModeIndex& m) const;

 private:
  std::shared_ptr<const ModeSpace> space_;
  std::vector<EigenMode> modes_;
};

}  // namespace eqw
