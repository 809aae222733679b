#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "eqwaves/dispersion.hpp"

namespace eqw {

class ModeSpace;

enum class TriadClass { ZeroMode, AllKelvin, Accidental, NonResonant };

std::string_view to_string(TriadClass c);

// Inputs a and b feed the output c, with c.k = a.k + b.k.
struct TriadRecord {
  ModeIndex a;
  ModeIndex b;
  ModeIndex c;
  double beta = 1.0;
  double defect = 0.0;
  TriadClass classification = TriadClass::NonResonant;
};

double triad_defect(double beta, const ModeIndex& a, const ModeIndex& b, const ModeIndex& c);

// tol * max(1, |ta| + |tb| + |tc|)
double resonance_threshold(double tol, double ta, double tb, double tc);

inline constexpr double kDefaultResonanceTol = 1e-9;

// Product of the 27 defects tau(n,k,j) + tau(n*,k*,j*) - tau(m,k+k*,l).
double p_polynomial(double beta, int n, int n_star, int m, int k, int k_star);

// Large-beta expansion of the slow-branch defect (n,k,0) + (n*,k*,0) -> (m,k+k*,0):
// defect = omega0 + omega1 / beta + O(1/beta^2).
struct OmegaCoefficients {
  double omega0 = 0.0;
  double omega1 = 0.0;
};
OmegaCoefficients omega_coefficients(int n, int n_star, int m, int k, int k_star);

// All three modes of a triad are restricted to one wave class, or none for All.
enum class Sector { All, Kelvin, Rossby, Poincare, Mixed, Geostrophic };
Sector parse_sector(std::string_view s);
std::string_view to_string(Sector s);

struct ScanReport {
  double beta = 1.0;
  int n_max = 0;
  int k_max = 0;
  double tol = kDefaultResonanceTol;
  std::vector<TriadRecord> records;  // resonant triads, sorted lexicographically
  std::size_t count_zero_mode = 0;
  std::size_t count_all_kelvin = 0;
  std::size_t count_accidental = 0;
  // Smallest |defect| among triads that are neither zero-mode nor all-Kelvin.
  std::optional<TriadRecord> min_nonexempt;
  // Largest |defect| over all-Kelvin triads.
  double max_kelvin_defect = 0.0;
  // (n, k) whose dispersion cubic has a repeated root.
  std::vector<std::pair<int, int>> double_roots;
};

ScanReport scan_resonances(double beta, int n_max, int k_max, double tol = kDefaultResonanceTol,
                           Sector sector = Sector::All);

std::vector<TriadRecord> enumerate_resonances(double beta, int n_max, int k_max,
                                              double tol = kDefaultResonanceTol);

// Fast membership test for resonant triads within a ModeSpace truncation.
class ResonantSet {
 public:
  ResonantSet() = default;
  ResonantSet(const ModeSpace& space, double tol = kDefaultResonanceTol);

  double beta() const { return beta_; }
  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }
  double tol() const { return tol_; }
  std::size_t size() const { return set_.size(); }
  const std::vector<TriadRecord>& records() const { return records_; }

  // Mode indices refer to the ModeSpace the set was built from; a and b are inputs.
  bool contains(std::size_t a, std::size_t b, std::size_t c) const;
  // Throws ConfigurationError unless built for this space.
  void check_compatible(const ModeSpace& space) const;

 private:
  std::uint64_t key(std::size_t a, std::size_t b, std::size_t c) const;

  double beta_ = 0.0;
  int n_max_ = -1;
  int k_max_ = -1;
  double tol_ = kDefaultResonanceTol;
  std::size_t dim_ = 0;
  std::unordered_set<std::uint64_t> set_;
  std::vector<TriadRecord> records_;
};

}  // namespace eqw
