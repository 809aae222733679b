#include "eqwaves/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqwaves/dispersion.hpp"
#include "eqwaves/error.hpp"

namespace eqw {

namespace {

double ball_max_tau(double beta, int n_max, int k_max, int n_ball) {
  double m = 0;
  for (int k = -k_max; k <= k_max; ++k)
    for (int n = 0; n <= n_max; ++n) {
      if (static_cast<long>(n) + static_cast<long>(k) * k > static_cast<long>(n_ball) * n_ball) continue;
      for (double t : roots(beta, n, k).taus) m = std::max(m, std::abs(t));
    }
  return m;
}

ModeCoefficients ageostrophic(const ModeCoefficients& x) {
  ModeCoefficients out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (x.space().wave_class(i) == WaveClass::Geostrophic) out[i] = 0.0;
  return out;
}

// Step size no larger than `dt` that divides 0.01, so saved times fall on a common grid.
double aligned_step(double dt) {
  if (dt >= 0.01) return dt;
  return 0.01 / std::ceil(0.01 / dt - 1e-9);
}

struct Stepper {
  const Model& model;
  const SolverConfig& cfg;
  bool filtered;

  ModeCoefficients rhs(const ModeCoefficients& x, double t) const {
    if (filtered) return model.filtered_rhs(x, t, cfg.eps, cfg.nu, cfg.quadratic);
    return model.limit_rhs(x, cfg.nu, cfg.quadratic);
  }
  // Right-hand side without the Delta'_L part, for the split integrator.
  ModeCoefficients explicit_rhs(const ModeCoefficients& x, double t) const {
    ModeCoefficients r = rhs(x, t);
    if (cfg.nu != 0.0) r -= cfg.nu * model.masked(model.diffusion().apply_L(x));
    return r;
  }
  // The filtered system dissipates through the full Delta' acting on the unfiltered state.
  double dissipation_rate(const ModeCoefficients& x, double t) const {
    if (cfg.nu == 0.0) return 0.0;
    if (!filtered) return 2 * cfg.nu * model.diffusion().dissipation(x);
    const ModeCoefficients y = filter(x, t / cfg.eps);
    return -2 * cfg.nu * inner(y, model.diffusion().apply(y)).real();
  }
};

DiagnosticRecord diagnose(const ModeCoefficients& x, double t, double dissipation) {
  return {t, x.l2_norm(), hl_norm(ageostrophic(x), 1.0), dissipation};
}

Trajectory integrate(const Model& model, const SolverConfig& cfg, const ModeCoefficients& mc0, bool filtered) {
  validate(cfg, filtered);
  if (!model.matches(cfg)) throw ConfigurationError("model was built for a different beta or truncation");
  if (!mc0.space().same_as(model.space())) throw TruncationMismatch("initial data uses a different truncation");
  const Stepper st{model, cfg, filtered};
  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-9)));
  const double h = cfg.t_final / steps;
  const long stride = snapshot_stride(h);

  ModeCoefficients x = model.masked(mc0);
  const double l0 = x.l2_norm();
  double diss = 0.0;
  Trajectory tr;
  tr.times.push_back(0.0);
  tr.states.push_back(x);
  tr.diagnostics.push_back(diagnose(x, 0.0, 0.0));
  for (long s = 1; s <= steps; ++s) {
    const double t = (s - 1) * h;
    if (cfg.integrator == Integrator::Rk4) {
      ModeCoefficients k1 = st.rhs(x, t);
      const double e1 = st.dissipation_rate(x, t);
      ModeCoefficients x2 = x + (0.5 * h) * k1;
      ModeCoefficients k2 = st.rhs(x2, t + 0.5 * h);
      const double e2 = st.dissipation_rate(x2, t + 0.5 * h);
      ModeCoefficients x3 = x + (0.5 * h) * k2;
      ModeCoefficients k3 = st.rhs(x3, t + 0.5 * h);
      const double e3 = st.dissipation_rate(x3, t + 0.5 * h);
      ModeCoefficients x4 = x + h * k3;
      ModeCoefficients k4 = st.rhs(x4, t + h);
      const double e4 = st.dissipation_rate(x4, t + h);
      x += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      diss += h / 6 * (e1 + 2 * e2 + 2 * e3 + e4);
    } else {
      const double before = st.dissipation_rate(x, t);
      const double a = cfg.nu * 0.5 * h;
      ModeCoefficients y = model.diffusion_exp(x, a);
      ModeCoefficients k1 = st.explicit_rhs(y, t);
      ModeCoefficients k2 = st.explicit_rhs(y + (0.5 * h) * k1, t + 0.5 * h);
      ModeCoefficients k3 = st.explicit_rhs(y + (0.5 * h) * k2, t + 0.5 * h);
      ModeCoefficients k4 = st.explicit_rhs(y + h * k3, t + h);
      y += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      x = model.diffusion_exp(y, a);
      diss += 0.5 * h * (before + st.dissipation_rate(x, t + h));
    }
    if (x.is_real()) x.enforce_reality();
    const double l = x.l2_norm();
    if (!std::isfinite(l) || (l > 10 * l0 && l > 0))
      throw InstabilityError("energy blow-up at step " + std::to_string(s) + " (t = " + std::to_string(s * h) + ")", s);
    tr.diagnostics.push_back(diagnose(x, s * h, diss));
    if (s % stride == 0 || s == steps) {
      tr.times.push_back(s * h);
      tr.states.push_back(x);
    }
  }
  return tr;
}

Eigen::VectorXcd kernel_vector(const Model& m, const ModeCoefficients& x) {
  Eigen::VectorXcd v(m.kernel_modes().size());
  for (std::size_t i = 0; i < m.kernel_modes().size(); ++i) v[i] = x[m.kernel_modes()[i]];
  return v;
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return !v.empty();
}

}  // namespace

std::string_view to_string(Integrator i) { return i == Integrator::Rk4 ? "rk4" : "strang-exp"; }

Integrator parse_integrator(std::string_view s) {
  if (s == "rk4") return Integrator::Rk4;
  if (s == "strang-exp") return Integrator::StrangExp;
  throw ConfigurationError("unknown integrator '" + std::string(s) + "' (rk4, strang-exp)");
}

void validate(const SolverConfig& cfg, bool filtered) {
  if (!(cfg.beta > 0) || !std::isfinite(cfg.beta)) throw ConfigurationError("beta must be positive");
  if (!(cfg.nu >= 0) || !std::isfinite(cfg.nu)) throw ConfigurationError("nu must be nonnegative");
  if (cfg.n_max < 0 || cfg.k_max < 0 || cfg.n_ball < 0) throw ConfigurationError("truncations must be nonnegative");
  if (!(cfg.dt > 0) || !(cfg.t_final > 0)) throw ConfigurationError("dt and t_final must be positive");
  if (cfg.dt > cfg.t_final) throw ConfigurationError("dt exceeds t_final");
  if (!(cfg.tol > 0)) throw ConfigurationError("resonance tolerance must be positive");
  if (!filtered) return;
  if (!(cfg.eps > 0)) throw ConfigurationError("eps must be positive for the filtered system");
  if (cfg.integrator == Integrator::Rk4) {
    const double cap = cfg.eps / (10 * ball_max_tau(cfg.beta, cfg.n_max, cfg.k_max, cfg.n_ball));
    if (cfg.dt > cap * (1 + 1e-12))
      throw ConfigurationError("dt = " + std::to_string(cfg.dt) + " exceeds eps/(10 max|tau|) = " + std::to_string(cap));
  }
}

Model::Model(const SolverConfig& cfg, bool full)
    : beta_(cfg.beta), n_max_(cfg.n_max), k_max_(cfg.k_max), n_ball_(cfg.n_ball), tol_(cfg.tol) {
  validate(cfg, false);
  basis_ = std::make_shared<Eigenbasis>(cfg.beta, cfg.n_max, cfg.k_max);
  const ModeSpace& s = basis_->space();
  mask_ = truncation_mask(s, Truncation::Ball, cfg.n_ball);
  rs_ = ResonantSet(s, cfg.tol);
  limit_ = InteractionTensor(*basis_, InteractionTensor::Kind::Resonant, cfg.tol, &mask_);
  if (full) full_ = InteractionTensor(*basis_, InteractionTensor::Kind::Full, cfg.tol, &mask_);
  diff_ = DiffusionOperator(*basis_);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!mask_[i]) continue;
    max_tau_ = std::max(max_tau_, std::abs(s.tau(i)));
    if (s.wave_class(i) == WaveClass::Geostrophic) kernel_.push_back(i);
  }
  // Delta'_L restricted to the ball, one block per eigenvalue group.
  for (const auto& g : diff_.groups()) {
    ExpBlock b;
    for (std::size_t i : g)
      if (mask_[i]) b.modes.push_back(i);
    if (b.modes.size() < 2) continue;
    const std::size_t n = b.modes.size();
    Eigen::MatrixXcd m(n, n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) m(r, c) = diff_.entry(b.modes[r], b.modes[c]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    b.evals = es.eigenvalues();
    b.evecs = es.eigenvectors();
    blocks_.push_back(std::move(b));
  }
}

const InteractionTensor& Model::full_tensor() const {
  if (!full_) throw ConfigurationError("model was built without the full interaction tensor");
  return *full_;
}

bool Model::matches(const SolverConfig& cfg) const {
  return cfg.beta == beta_ && cfg.n_max == n_max_ && cfg.k_max == k_max_ && cfg.n_ball == n_ball_ && cfg.tol == tol_;
}

ModeCoefficients Model::masked(ModeCoefficients x) const {
  apply_mask(x, mask_);
  return x;
}

ModeCoefficients Model::limit_rhs(const ModeCoefficients& x, double nu, bool quadratic) const {
  ModeCoefficients out(x.space_ptr(), x.is_real());
  if (quadratic) out -= q_apply(limit_, x, x);
  if (nu != 0.0) out += nu * diff_.apply_L(x);
  return masked(std::move(out));
}

ModeCoefficients Model::filtered_rhs(const ModeCoefficients& x, double t, double eps, double nu, bool quadratic) const {
  const double theta = t / eps;
  ModeCoefficients y = filter(x, theta);
  ModeCoefficients out(x.space_ptr(), x.is_real());
  if (quadratic) out -= q_apply(full_tensor(), y, y);
  if (nu != 0.0) out += nu * diff_.apply(y);
  return masked(filter(out, -theta));
}

ModeCoefficients Model::diffusion_exp(const ModeCoefficients& x, double s) const {
  ModeCoefficients out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask_[i]) out[i] *= std::exp(s * diff_.diagonal(i));
  for (const ExpBlock& b : blocks_) {
    Eigen::VectorXcd v(b.modes.size());
    for (std::size_t i = 0; i < b.modes.size(); ++i) v[i] = x[b.modes[i]];
    Eigen::VectorXcd w = b.evecs.adjoint() * v;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= std::exp(s * b.evals[i]);
    Eigen::VectorXcd r = b.evecs * w;
    for (std::size_t i = 0; i < b.modes.size(); ++i) out[b.modes[i]] = r[i];
  }
  if (out.is_real()) out.enforce_reality();
  return masked(std::move(out));
}

long snapshot_stride(double dt) { return std::max(1L, std::lround(0.01 / dt)); }

Trajectory integrate_limit(const Model& model, const SolverConfig& cfg, const ModeCoefficients& mc0) {
  return integrate(model, cfg, mc0, false);
}

Trajectory integrate_limit(const SolverConfig& cfg, const ModeCoefficients& mc0) {
  Model m(cfg, false);
  return integrate(m, cfg, mc0, false);
}

Trajectory integrate_filtered(const Model& model, const SolverConfig& cfg, const ModeCoefficients& mc0) {
  return integrate(model, cfg, mc0, true);
}

Trajectory integrate_filtered(const SolverConfig& cfg, const ModeCoefficients& mc0) {
  Model m(cfg, true);
  return integrate(m, cfg, mc0, true);
}

Eigen::VectorXcd geostrophic_solve(const GeostrophicDiffusion& g, const Eigen::VectorXcd& v, double nu, double t) {
  if (!(nu >= 0)) throw InvalidArgument("nu must be nonnegative");
  if (v.size() != g.matrix.rows()) throw TruncationMismatch("kernel vector size does not match the band matrix");
  if (nu == 0.0 || t == 0.0) return v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix);
  Eigen::VectorXd f = (nu * t * es.eigenvalues().array()).exp();
  Eigen::MatrixXcd V = es.eigenvectors().cast<cplx>();
  return V * (f.cast<cplx>().asDiagonal() * (V.adjoint() * v));
}

GeostrophicDiffusion kernel_diffusion(double beta, std::size_t count) {
  if (count == 0) throw InvalidArgument("empty kernel");
  const int top = std::max<int>(static_cast<int>(count) - 1, 5);
  GeostrophicDiffusion g = geostrophic_diffusion(beta, top);
  if (static_cast<int>(count) - 1 < top) {
    g.matrix = g.matrix.topLeftCorner(count, count).eval();
    g.n_max = static_cast<int>(count) - 1;
  }
  return g;
}

ModeCoefficients initial_data(const Model& model, std::uint64_t seed, double amplitude) {
  ModeCoefficients x = random_modes(model.space_ptr(), seed, true, 2.0);
  x *= amplitude;
  return model.masked(std::move(x));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("slope needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidArgument("log-log slope needs positive values");
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceReport convergence_sweep(const SolverConfig& base, const std::vector<double>& eps_list,
                                    const ModeCoefficients& mc0, bool with_corrector) {
  if (eps_list.empty()) throw InvalidArgument("empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw InvalidArgument("eps list must be sorted decreasing");
  SolverConfig lcfg = base;
  lcfg.dt = aligned_step(base.dt);
  Model model(base, true);
  const ModeCoefficients x0 = model.masked(mc0);
  const Trajectory limit = integrate_limit(model, lcfg, x0);
  const GeostrophicDiffusion g = kernel_diffusion(base.beta, model.kernel_modes().size());
  const Eigen::VectorXcd k0 = kernel_vector(model, x0);
  const auto& full = model.full_tensor();

  auto at = [](const Trajectory& tr, double t) -> const ModeCoefficients* {
    auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t - 1e-9);
    if (it == tr.times.end() || std::abs(*it - t) > 1e-9) return nullptr;
    return &tr.states[it - tr.times.begin()];
  };

  ConvergenceReport rep;
  for (double eps : eps_list) {
    SolverConfig fcfg = base;
    fcfg.eps = eps;
    double dt = base.dt;
    if (base.integrator == Integrator::Rk4) dt = std::min(dt, eps / (10 * model.max_tau()));
    fcfg.dt = aligned_step(dt);
    const Trajectory f = integrate_filtered(model, fcfg, x0);
    SweepRow row;
    row.eps = eps;
    row.dt = fcfg.dt;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
      const double t = f.times[i];
      const ModeCoefficients* l = at(limit, t);
      if (!l) continue;
      row.sup_error = std::max(row.sup_error, (f.states[i] - *l).l2_norm());
      const Eigen::VectorXcd kg = geostrophic_solve(g, k0, base.nu, t);
      row.sup_kernel_error = std::max(row.sup_kernel_error, (kernel_vector(model, f.states[i]) - kg).norm());
    }
    if (with_corrector) {
      const auto& rs = model.resonant_set();
      const auto& d = model.diffusion();
      ModeCoefficients start = x0 - eps * corrector(full, rs, d, x0, model.mask(), eps, 0.0, base.nu);
      const Trajectory prepared = integrate_limit(model, lcfg, model.masked(start));
      for (std::size_t i = 0; i < f.times.size(); ++i) {
        const double t = f.times[i];
        const ModeCoefficients* l = at(prepared, t);
        if (!l) continue;
        ModeCoefficients c = *l + eps * corrector(full, rs, d, *l, model.mask(), eps, t, base.nu);
        row.sup_error_corrected = std::max(row.sup_error_corrected, (f.states[i] - c).l2_norm());
      }
    }
    rep.rows.push_back(row);
  }
  std::vector<double> e, s, k;
  for (const auto& r : rep.rows) {
    e.push_back(r.eps);
    s.push_back(r.sup_error);
    k.push_back(r.sup_kernel_error);
  }
  rep.monotone = strictly_decreasing(s);
  rep.kernel_monotone = strictly_decreasing(k);
  if (e.size() >= 2) {
    auto positive = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [](double x) { return x > 0; });
    };
    if (positive(s)) rep.slope = loglog_slope(e, s);
    if (positive(k)) rep.kernel_slope = loglog_slope(e, k);
  }
  rep.corrector_helps = with_corrector && rep.rows.back().sup_error_corrected <= rep.rows.back().sup_error;
  return rep;
}

WeakLimitReport weak_limit_from(const ConvergenceReport& r) {
  WeakLimitReport w;
  for (const auto& row : r.rows) w.rows.push_back({row.eps, row.sup_kernel_error});
  w.monotone = r.kernel_monotone;
  w.slope = r.kernel_slope;
  return w;
}

WeakLimitReport weak_limit_experiment(const SolverConfig& cfg, const ModeCoefficients& mc0,
                                      const std::vector<double>& eps_list) {
  return weak_limit_from(convergence_sweep(cfg, eps_list, mc0, false));
}

}  // namespace eqw
