#include "eqwaves/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqwaves/error.hpp"
#include "eqwaves/fields.hpp"

namespace eqw {

namespace {

std::string describe(const ModeIndex& m) {
  return "(" + std::to_string(m.n) + "," + std::to_string(m.k) + "," + std::to_string(m.j) + ")";
}

void check_mode(const ModeIndex& m) {
  if (m.n < 0 || m.j < -1 || m.j > 1) throw InvalidArgument("invalid mode index " + describe(m));
}

// Slow-branch expansion tau(n,k,0) = e0 + e1 / beta + O(1/beta^2).
std::pair<double, double> slow_expansion(int n, int k) {
  const double kk = k;
  if (n == 0) return {kk, 0.0};
  const double m = 2 * n + 1;
  return {-kk / m, 4.0 * n * (n + 1) * kk * kk * kk / (m * m * m * m)};
}

bool in_sector(WaveClass c, Sector s) {
  switch (s) {
    case Sector::All: return true;
    case Sector::Kelvin: return c == WaveClass::Kelvin;
    case Sector::Rossby: return c == WaveClass::Rossby;
    case Sector::Poincare: return c == WaveClass::Poincare;
    case Sector::Mixed: return c == WaveClass::Mixed;
    case Sector::Geostrophic: return c == WaveClass::Geostrophic;
  }
  return false;
}

// Visits every ordered input pair (a, b) and output c with c.k = a.k + b.k whose defect
// is below threshold, plus reports the nearest non-exempt output for each pair.
struct Scanner {
  const ModeSpace& space;
  double tol;
  Sector sector;
  // Per wavenumber: mode indices sorted by tau, and the subset with tau != 0.
  std::vector<std::vector<std::size_t>> by_k;
  std::vector<std::vector<std::size_t>> nonzero_by_k;

  Scanner(const ModeSpace& s, double t, Sector sec) : space(s), tol(t), sector(sec) {
    const int K = s.k_max();
    by_k.resize(2 * K + 1);
    nonzero_by_k.resize(2 * K + 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!in_sector(s.wave_class(i), sector)) continue;
      const int k = s.mode(i).k;
      by_k[k + K].push_back(i);
      if (s.tau(i) != 0.0) nonzero_by_k[k + K].push_back(i);
    }
    auto by_tau = [&](std::size_t a, std::size_t b) {
      return s.tau(a) < s.tau(b) || (s.tau(a) == s.tau(b) && a < b);
    };
    for (auto& v : by_k) std::sort(v.begin(), v.end(), by_tau);
    for (auto& v : nonzero_by_k) std::sort(v.begin(), v.end(), by_tau);
  }

  bool all_kelvin(std::size_t a, std::size_t b, std::size_t c) const {
    return space.wave_class(a) == WaveClass::Kelvin && space.wave_class(b) == WaveClass::Kelvin &&
           space.wave_class(c) == WaveClass::Kelvin;
  }

  template <class OnResonant, class OnNearest>
  void run(OnResonant&& on_resonant, OnNearest&& on_nearest) const {
    const int K = space.k_max();
    for (int ka = -K; ka <= K; ++ka)
      for (std::size_t a : by_k[ka + K])
        for (int kb = -K; kb <= K; ++kb) {
          const int kc = ka + kb;
          if (kc < -K || kc > K) continue;
          const auto& outs = by_k[kc + K];
          const auto& nz = nonzero_by_k[kc + K];
          for (std::size_t b : by_k[kb + K]) {
            const double ta = space.tau(a), tb = space.tau(b);
            const double target = ta + tb;
            const double width = 2 * resonance_threshold(tol, ta, tb, std::abs(target) + 1.0);
            auto lo = std::lower_bound(outs.begin(), outs.end(), target - width,
                                       [&](std::size_t i, double v) { return space.tau(i) < v; });
            for (auto it = lo; it != outs.end() && space.tau(*it) <= target + width; ++it) {
              const double tc = space.tau(*it);
              const double d = target - tc;
              if (std::abs(d) < resonance_threshold(tol, ta, tb, tc)) on_resonant(a, b, *it, d);
            }
            if (ta == 0.0 || tb == 0.0 || nz.empty()) continue;
            auto pos = std::lower_bound(nz.begin(), nz.end(), target,
                                        [&](std::size_t i, double v) { return space.tau(i) < v; });
            const std::ptrdiff_t p = pos - nz.begin();
            for (std::ptrdiff_t q = std::max<std::ptrdiff_t>(0, p - 2);
                 q < std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nz.size()), p + 2); ++q) {
              const std::size_t c = nz[q];
              if (all_kelvin(a, b, c)) continue;
              on_nearest(a, b, c, target - space.tau(c));
            }
          }
        }
  }
};

TriadClass classify_resonant(const ModeSpace& s, std::size_t a, std::size_t b, std::size_t c) {
  if (s.tau(a) == 0.0 || s.tau(b) == 0.0 || s.tau(c) == 0.0) return TriadClass::ZeroMode;
  if (s.wave_class(a) == WaveClass::Kelvin && s.wave_class(b) == WaveClass::Kelvin &&
      s.wave_class(c) == WaveClass::Kelvin)
    return TriadClass::AllKelvin;
  return TriadClass::Accidental;
}

bool record_less(const TriadRecord& x, const TriadRecord& y) {
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.c < y.c;
}

}  // namespace

std::string_view to_string(TriadClass c) {
  switch (c) {
    case TriadClass::ZeroMode: return "zero-mode";
    case TriadClass::AllKelvin: return "all-Kelvin";
    case TriadClass::Accidental: return "accidental";
    case TriadClass::NonResonant: return "non-resonant";
  }
  return "?";
}

Sector parse_sector(std::string_view s) {
  if (s == "all") return Sector::All;
  if (s == "kelvin") return Sector::Kelvin;
  if (s == "rossby") return Sector::Rossby;
  if (s == "poincare") return Sector::Poincare;
  if (s == "mixed") return Sector::Mixed;
  if (s == "geostrophic") return Sector::Geostrophic;
  throw InvalidArgument("unknown sector '" + std::string(s) + "'");
}

std::string_view to_string(Sector s) {
  switch (s) {
    case Sector::All: return "all";
    case Sector::Kelvin: return "kelvin";
    case Sector::Rossby: return "rossby";
    case Sector::Poincare: return "poincare";
    case Sector::Mixed: return "mixed";
    case Sector::Geostrophic: return "geostrophic";
  }
  return "?";
}

double triad_defect(double beta, const ModeIndex& a, const ModeIndex& b, const ModeIndex& c) {
  check_mode(a);
  check_mode(b);
  check_mode(c);
  if (c.k != a.k + b.k)
    throw InvalidTriad("wavenumbers do not add up: " + describe(a) + " + " + describe(b) + " -> " + describe(c));
  return tau(beta, a.n, a.k, a.j) + tau(beta, b.n, b.k, b.j) - tau(beta, c.n, c.k, c.j);
}

double resonance_threshold(double tol, double ta, double tb, double tc) {
  return tol * std::max(1.0, std::abs(ta) + std::abs(tb) + std::abs(tc));
}

double p_polynomial(double beta, int n, int n_star, int m, int k, int k_star) {
  const RootTriple ra = roots(beta, n, k);
  const RootTriple rb = roots(beta, n_star, k_star);
  const RootTriple rc = roots(beta, m, k + k_star);
  double p = 1.0;
  for (double x : ra.taus)
    for (double y : rb.taus)
      for (double z : rc.taus) p *= x + y - z;
  return p;
}

OmegaCoefficients omega_coefficients(int n, int n_star, int m, int k, int k_star) {
  if (n < 0 || n_star < 0 || m < 0) throw InvalidArgument("negative hermite index");
  auto [a0, a1] = slow_expansion(n, k);
  auto [b0, b1] = slow_expansion(n_star, k_star);
  auto [c0, c1] = slow_expansion(m, k + k_star);
  return {a0 + b0 - c0, a1 + b1 - c1};
}

ScanReport scan_resonances(double beta, int n_max, int k_max, double tol, Sector sector) {
  if (!(tol > 0)) throw InvalidArgument("tolerance must be positive");
  if (n_max < 0 || k_max < 0) throw InvalidArgument("negative truncation");
  ModeSpace space(beta, n_max, k_max);
  ScanReport rep;
  rep.beta = beta;
  rep.n_max = n_max;
  rep.k_max = k_max;
  rep.tol = tol;
  Scanner sc(space, tol, sector);
  double best = INFINITY;
  sc.run(
      [&](std::size_t a, std::size_t b, std::size_t c, double d) {
        TriadRecord r{space.mode(a), space.mode(b), space.mode(c), beta, d, classify_resonant(space, a, b, c)};
        switch (r.classification) {
          case TriadClass::ZeroMode: ++rep.count_zero_mode; break;
          case TriadClass::AllKelvin:
            ++rep.count_all_kelvin;
            rep.max_kelvin_defect = std::max(rep.max_kelvin_defect, std::abs(d));
            break;
          default: ++rep.count_accidental; break;
        }
        rep.records.push_back(r);
      },
      [&](std::size_t a, std::size_t b, std::size_t c, double d) {
        if (std::abs(d) < best) {
          best = std::abs(d);
          const bool res = best < resonance_threshold(tol, space.tau(a), space.tau(b), space.tau(c));
          rep.min_nonexempt = TriadRecord{space.mode(a), space.mode(b), space.mode(c), beta, d,
                                          res ? classify_resonant(space, a, b, c) : TriadClass::NonResonant};
        }
      });
  std::sort(rep.records.begin(), rep.records.end(), record_less);
  for (int n = 0; n <= n_max; ++n)
    for (int k = -k_max; k <= k_max; ++k) {
      const double p = -(static_cast<double>(k) * k + beta * (2 * n + 1));
      const double q = -beta * k;
      const double disc = 4 * p * p * p + 27 * q * q;
      if (std::abs(disc) <= 1e-9 * (std::abs(4 * p * p * p) + 27 * q * q)) rep.double_roots.emplace_back(n, k);
    }
  return rep;
}

std::vector<TriadRecord> enumerate_resonances(double beta, int n_max, int k_max, double tol) {
  return scan_resonances(beta, n_max, k_max, tol).records;
}

ResonantSet::ResonantSet(const ModeSpace& space, double tol)
    : beta_(space.beta()), n_max_(space.n_max()), k_max_(space.k_max()), tol_(tol), dim_(space.size()) {
  if (!(tol > 0)) throw InvalidArgument("tolerance must be positive");
  Scanner sc(space, tol, Sector::All);
  sc.run(
      [&](std::size_t a, std::size_t b, std::size_t c, double d) {
        set_.insert(key(a, b, c));
        records_.push_back({space.mode(a), space.mode(b), space.mode(c), beta_, d, classify_resonant(space, a, b, c)});
      },
      [](std::size_t, std::size_t, std::size_t, double) {});
  std::sort(records_.begin(), records_.end(), record_less);
}

std::uint64_t ResonantSet::key(std::size_t a, std::size_t b, std::size_t c) const {
  return (static_cast<std::uint64_t>(a) * dim_ + b) * dim_ + c;
}

bool ResonantSet::contains(std::size_t a, std::size_t b, std::size_t c) const {
  return set_.count(key(a, b, c)) != 0;
}

void ResonantSet::check_compatible(const ModeSpace& space) const {
  if (space.beta() != beta_ || space.n_max() != n_max_ || space.k_max() != k_max_)
    throw ConfigurationError("resonant set was built for a different beta or truncation");
}

}  // namespace eqw
