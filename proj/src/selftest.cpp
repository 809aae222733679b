#include "eqwaves/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

#include "eqwaves/dispersion.hpp"
#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/fields.hpp"
#include "eqwaves/hermite.hpp"
#include "eqwaves/operators.hpp"
#include "eqwaves/resonance.hpp"
#include "eqwaves/solver.hpp"

namespace eqw {

namespace {

constexpr double kE = 2.718281828459045;

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

std::string hermite_suite(bool& ok) {
  HermiteContext ctx(kE, 24);
  const QuadratureRule& r = ctx.rule(1.0);
  double dev = 0;
  std::vector<double> f(r.size());
  for (int m = 0; m <= 24; ++m)
    for (int n = m; n <= 24; ++n) {
      for (std::size_t i = 0; i < r.size(); ++i) f[i] = eval_psi(ctx, m, r.nodes[i]) * eval_psi(ctx, n, r.nodes[i]);
      dev = std::max(dev, std::abs(integrate(r, f) - (m == n ? 1.0 : 0.0)));
    }
  ok = dev <= 1e-12;
  return fmt("orthonormality deviation %.2e over n <= 24", dev);
}

std::string dispersion_suite(bool& ok) {
  double worst = 0, kelvin = 0;
  for (double beta : {0.3, 1.0, kE, 10.0})
    for (int n = 0; n <= 64; n += 3)
      for (int k = -16; k <= 16; ++k) {
        const RootTriple t = roots(beta, n, k);
        if (n == 0 && k != 0) {
          // tau = k plus the two roots of t^2 - k t - beta.
          kelvin = std::max(kelvin, std::abs(t.tau(0) - k));
          for (int j : {-1, 1})
            worst = std::max(worst, std::abs(t.tau(j) * t.tau(j) - k * t.tau(j) - beta) / (t.tau(j) * t.tau(j) + beta));
          continue;
        }
        const double s1 = t.taus[0] + t.taus[1] + t.taus[2];
        const double s2 = t.taus[0] * t.taus[1] + t.taus[0] * t.taus[2] + t.taus[1] * t.taus[2];
        const double s3 = t.taus[0] * t.taus[1] * t.taus[2];
        const double a = k * double(k) + beta * (2 * n + 1);
        worst = std::max({worst, std::abs(s1) / std::sqrt(a), std::abs(s2 + a) / a,
                          std::abs(s3 - beta * k) / std::max(1.0, std::abs(beta * k))});
      }
  ok = worst <= 1e-9 && kelvin <= 1e-12;
  return fmt("symmetric-function deviation %.2e, Kelvin |tau - k| %.2e", worst, kelvin);
}

std::string eigenbasis_suite(bool& ok) {
  Eigenbasis b(1.0, 6, 6);
  const std::size_t m = b.space().size();
  std::vector<SpectralField> fs;
  for (std::size_t i = 0; i < m; ++i) fs.push_back(b.to_field(b.unit(b.space().mode(i))));
  double gram = 0, res = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      cplx s{};
      for (std::size_t q = 0; q < fs[i].data().size(); ++q) s += std::conj(fs[i].data()[q]) * fs[j].data()[q];
      gram = std::max(gram, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
    const SpectralField r = apply_L(fs[i]) - cplx(0, b.space().tau(i)) * fs[i].resized(8, 6);
    res = std::max(res, r.l2_norm());
  }
  ok = gram <= 1e-8 && res <= 1e-9;
  return fmt("Gram deviation %.2e, eigen-residual %.2e at beta = 1, n, |k| <= 6", gram, res);
}

std::string fields_suite(bool& ok) {
  Eigenbasis b(kE, 6, 4);
  double round = 0, iso = 0, group = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ModeCoefficients x = random_modes(b.space_ptr(), seed, seed % 2 == 1, 1.0);
    round = std::max(round, (b.decompose(b.to_field(x)) - x).l2_norm() / x.l2_norm());
    iso = std::max(iso, std::abs(filter(x, 0.7).l2_norm() - x.l2_norm()) / x.l2_norm());
    group = std::max(group, (filter(filter(x, 0.3), 0.4) - filter(x, 0.7)).l2_norm() / x.l2_norm());
  }
  ok = round <= 1e-12 && iso <= 1e-14 && group <= 1e-14;
  return fmt("decompose round trip %.2e, filter isometry %.2e, group law %.2e", round, iso, group);
}

std::string resonance_suite(bool& ok) {
  const ScanReport r = scan_resonances(kE, 4, 4, 1e-9);
  ok = r.count_accidental == 0 && r.max_kelvin_defect < 1e-14;
  const double gap = r.min_nonexempt ? std::abs(r.min_nonexempt->defect) : 0.0;
  return fmt("%.0f accidental triads at beta = e, n, |k| <= 4; max Kelvin defect %.2e; min non-exempt defect %.2e",
             double(r.count_accidental), r.max_kelvin_defect, gap);
}

std::string operators_suite(bool& ok) {
  Eigenbasis b(kE, 4, 4);
  const InteractionTensor full(b, InteractionTensor::Kind::Full);
  const ResonantSet rs(b.space());
  double route = 0, kernel = 0, energy = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const ModeCoefficients x = random_modes(b.space_ptr(), seed, true, 1.0);
    const ModeCoefficients q = q_apply(full, x, x);
    route = std::max(route, (q - q_apply_quadrature(b, x, x)).l2_norm() / q.l2_norm());
    const ModeCoefficients ql = q_l_apply(full, rs, x, x);
    kernel = std::max(kernel, project(ql, WaveClass::Geostrophic).l2_norm());
    energy = std::max(energy, std::abs(inner(x, ql).real()) / std::pow(x.l2_norm(), 3));
  }
  double band = 0;
  for (int n = 4; n <= 12; ++n)
    for (int off : {-4, -2, 0, 2, 4})
      band = std::max(band, std::abs(geostrophic_alpha(kE, n, off) - geostrophic_quadrature_entry(kE, n + off, n)));
  ok = route <= 1e-8 && kernel <= 1e-10 && energy <= 1e-12 && band <= 1e-10;
  return fmt("tensor/quadrature %.2e, |Pi0 Q_L| %.2e, |(x|Q_L(x,x))| %.2e", route, kernel, energy) +
         fmt(", band closed form %.2e", band);
}

std::string solver_suite(bool& ok) {
  SolverConfig c;
  c.n_ball = 3;
  c.n_max = 9;
  c.k_max = 3;
  Model m(c, false);
  const ModeCoefficients x0 = initial_data(m, 1, 2.0);
  const Trajectory free = integrate_limit(m, c, x0);
  double drift = 0, excess = 0, outside = 0;
  const double e0 = x0.l2_norm() * x0.l2_norm();
  for (const auto& d : free.diagnostics) drift = std::max(drift, std::abs(d.l2 * d.l2 - e0) / e0);
  c.nu = 0.1;
  const Trajectory visc = integrate_limit(m, c, x0);
  for (const auto& d : visc.diagnostics) excess = std::max(excess, (d.l2 * d.l2 + d.dissipation - e0) / e0);
  for (const auto& s : visc.states) outside = std::max(outside, (s - m.masked(s)).l2_norm());
  auto terminal = [&](double dt) {
    SolverConfig k = c;
    k.dt = dt;
    return integrate_limit(m, k, initial_data(m, 1, 4.0)).states.back();
  };
  const ModeCoefficients a = terminal(0.1), h = terminal(0.05), q = terminal(0.025);
  const double ratio = (a - h).l2_norm() / (h - q).l2_norm();
  ok = drift <= 1e-6 && excess <= 1e-6 && outside == 0.0 && ratio > 12 && ratio < 20;
  return fmt("energy drift %.2e (nu = 0), estimate excess %.2e (nu = 0.1), rk4 halving ratio %.1f", drift, excess,
             ratio);
}

}  // namespace

std::vector<Suite> selftest_suites() {
  return {{"hermite", hermite_suite},       {"dispersion", dispersion_suite}, {"eigenbasis", eigenbasis_suite},
          {"fields", fields_suite},         {"resonance", resonance_suite},   {"operators", operators_suite},
          {"solver", solver_suite}};
}

SuiteResult run_suite(const Suite& s) {
  SuiteResult r{s.name, false, ""};
  try {
    r.detail = s.run(r.ok);
  } catch (const std::exception& e) {
    r.ok = false;
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

}  // namespace eqw
