#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/fields.hpp"
#include "eqwaves/resonance.hpp"

namespace eqw {

// Mode masks. Ball keeps n + k^2 <= N^2, Rectangle keeps n <= N and |k| <= N.
enum class Truncation { Ball, Rectangle };
std::vector<char> truncation_mask(const ModeSpace& space, Truncation kind, int N);
void apply_mask(ModeCoefficients& mc, const std::vector<char>& mask);

// One stored coefficient (Psi_a | Q(Psi_b, Psi_c)) with b <= c. Q is symmetric.
struct TensorEntry {
  std::uint32_t b;
  std::uint32_t c;
  cplx value;
};

// Q(Phi, Psi) = (div(eta_Phi u_Psi), (u_Phi . grad) u_Psi), symmetrized, in eigen coordinates.
class InteractionTensor {
 public:
  enum class Kind { Full, Resonant };

  InteractionTensor() = default;
  // Resonant keeps only triads in a ResonantSet built from the basis at `tol`.
  // With a mask, only triads whose three modes are all kept are assembled.
  InteractionTensor(const Eigenbasis& basis, Kind kind, double tol = kDefaultResonanceTol,
                    const std::vector<char>* mask = nullptr);

  Kind kind() const { return kind_; }
  double beta() const { return beta_; }
  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }
  double tol() const { return tol_; }
  std::size_t modes() const { return rows_.size(); }
  std::size_t nnz() const;
  const std::vector<TensorEntry>& row(std::size_t a) const { return rows_[a]; }
  // Zero when the entry is not stored.
  cplx value(std::size_t a, std::size_t b, std::size_t c) const;
  bool matches(const ModeSpace& space) const {
    return space.beta() == beta_ && space.n_max() == n_max_ && space.k_max() == k_max_;
  }
  // Entries whose triad belongs to `rs`.
  InteractionTensor restricted(const ResonantSet& rs) const;

  void save(const std::filesystem::path& path) const;
  // Throws IoError on unreadable or mismatched files.
  static InteractionTensor load(const std::filesystem::path& path);

 private:
  Kind kind_ = Kind::Full;
  double beta_ = 0.0;
  int n_max_ = 0;
  int k_max_ = 0;
  double tol_ = kDefaultResonanceTol;
  std::vector<std::vector<TensorEntry>> rows_;
};

inline constexpr int kTensorFormatVersion = 1;

// EQWAVES_CACHE_DIR, else $HOME/.cache/eqwaves, else ./.eqwaves-cache.
std::filesystem::path tensor_cache_dir();
std::filesystem::path tensor_cache_path(const ModeSpace& space, InteractionTensor::Kind kind, double tol);
// Reuses a cached unmasked tensor when its header matches; rebuilds and rewrites otherwise.
InteractionTensor load_or_build_tensor(const Eigenbasis& basis, InteractionTensor::Kind kind,
                                       double tol = kDefaultResonanceTol);

// (Psi_a | Q(Phi, Psi)) for every mode a, from the stored entries.
ModeCoefficients q_apply(const InteractionTensor& t, const ModeCoefficients& x, const ModeCoefficients& y);
// Same quantity by synthesizing both fields on a Gauss-Hermite x Fourier grid,
// forming Q pointwise and projecting back.
ModeCoefficients q_apply_quadrature(const Eigenbasis& basis, const ModeCoefficients& x,
                                    const ModeCoefficients& y);
// q_apply restricted to resonant triads.
ModeCoefficients q_l_apply(const InteractionTensor& t, const ResonantSet& rs, const ModeCoefficients& x,
                           const ModeCoefficients& y);

// (0, Delta u1, Delta u2) on a spectral field. Grow extends the hermite window by 2.
SpectralField delta_prime(const SpectralField& f, Overflow policy = Overflow::Grow);

// Delta' in eigen coordinates: one dense Hermitian block per wavenumber, plus the
// grouping of modes by eigenvalue used for Delta'_L.
class DiffusionOperator {
 public:
  DiffusionOperator() = default;
  explicit DiffusionOperator(const Eigenbasis& basis, double group_tol = 1e-9);

  const ModeSpace& space() const { return *space_; }
  // (Psi_a | Delta' Psi_b), zero unless the wavenumbers agree.
  cplx entry(std::size_t a, std::size_t b) const;
  double diagonal(std::size_t a) const { return diag_[a]; }
  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  // Group index of each mode.
  std::size_t group_of(std::size_t a) const { return group_of_[a]; }

  ModeCoefficients apply(const ModeCoefficients& mc) const;
  ModeCoefficients apply_L(const ModeCoefficients& mc) const;
  // exp(s Delta'_L) applied blockwise.
  ModeCoefficients exp_L(const ModeCoefficients& mc, double s) const;
  // (mc | -Delta'_L mc), real and nonnegative up to rounding.
  double dissipation(const ModeCoefficients& mc) const;
  // Same with H_L^s weights (1+n+k^2)^s on the outer index.
  double dissipation(const ModeCoefficients& mc, double s) const;

 private:
  struct Group {
    std::vector<std::size_t> modes;
    Eigen::MatrixXcd block;
    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;
  };
  std::shared_ptr<const ModeSpace> space_;
  int dim_k_ = 0;                      // modes per wavenumber
  std::vector<Eigen::MatrixXcd> by_k_;  // indexed by k + k_max, local order (n, j)
  std::vector<double> diag_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<Group> blocks_;
};

ModeCoefficients delta_prime(const DiffusionOperator& d, const ModeCoefficients& mc);
ModeCoefficients delta_prime_l_apply(const DiffusionOperator& d, const ModeCoefficients& mc);

// Pi_0 Delta' Pi_0 on the kernel modes Psi_{n,0,0}, 0 <= n <= n_max.
struct GeostrophicDiffusion {
  double beta = 1.0;
  int n_max = 0;
  Eigen::MatrixXd matrix;  // (m, n) = (Psi_m | Delta' Psi_n)

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }
};

// Closed-form band coefficient alpha_n^{(offset)}, offset in {-4,-2,0,2,4}, for the n >= 1 family.
double geostrophic_alpha(double beta, int n, int offset);
// (Psi_{m,0,0} | Delta' Psi_{n,0,0}) = -int d1(u2_m) d1(u2_n) dx1 by Gauss-Hermite quadrature.
double geostrophic_quadrature_entry(double beta, int m, int n);
GeostrophicDiffusion geostrophic_diffusion(double beta, int n_kernel_max);

// ||[N_s, Pi_0 Delta'] phi|| / ||N_s phi|| with N_s = diag((1+n)^s).
double ns_commutator_check(const GeostrophicDiffusion& g, double s, std::span<const cplx> kernel_coeffs);
Eigen::VectorXcd ns_commutator_apply(const GeostrophicDiffusion& g, double s, const Eigen::VectorXcd& v);

// First-order corrector: minus the nonresonant Q sum over inputs in `inputs` plus nu times
// the off-group Delta' sum, each term divided by i times its phase gap.
ModeCoefficients corrector(const InteractionTensor& t, const ResonantSet& rs, const DiffusionOperator& d,
                           const ModeCoefficients& mc_N, const std::vector<char>& inputs, double eps, double time,
                           double nu);

}  // namespace eqw
