#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/fields.hpp"
#include "eqwaves/operators.hpp"
#include "eqwaves/resonance.hpp"

namespace eqw {

enum class Integrator { Rk4, StrangExp };

std::string_view to_string(Integrator i);
Integrator parse_integrator(std::string_view s);

struct SolverConfig {
  double beta = 2.718281828459045;
  double nu = 0.0;
  double eps = 0.1;
  int n_max = 6;
  int k_max = 6;
  int n_ball = 6;  // K_N radius, (n + k^2)^{1/2} <= n_ball
  double dt = 1e-3;
  double t_final = 1.0;
  Integrator integrator = Integrator::Rk4;
  std::uint64_t seed = 1;
  bool quadratic = true;  // false switches the nonlinearity off
  double tol = kDefaultResonanceTol;
};

// Throws ConfigurationError. The filtered check includes the rk4 step cap.
void validate(const SolverConfig& cfg, bool filtered);

// Operators shared by every run at one (beta, truncation, ball).
class Model {
 public:
  // `full` also assembles the unfiltered tensor needed by the filtered system and the corrector.
  Model(const SolverConfig& cfg, bool full);

  const Eigenbasis& basis() const { return *basis_; }
  const ModeSpace& space() const { return basis_->space(); }
  const std::shared_ptr<const ModeSpace>& space_ptr() const { return basis_->space_ptr(); }
  const std::vector<char>& mask() const { return mask_; }
  const ResonantSet& resonant_set() const { return rs_; }
  const InteractionTensor& limit_tensor() const { return limit_; }
  const InteractionTensor& full_tensor() const;
  bool has_full() const { return full_.has_value(); }
  const DiffusionOperator& diffusion() const { return diff_; }
  // Kernel modes inside the ball, ordered by n.
  const std::vector<std::size_t>& kernel_modes() const { return kernel_; }
  // Largest |tau| over the ball.
  double max_tau() const { return max_tau_; }
  bool matches(const SolverConfig& cfg) const;

  // K_N (-Q_L(K_N x, K_N x) + nu Delta'_L K_N x)
  ModeCoefficients limit_rhs(const ModeCoefficients& x, double nu, bool quadratic) const;
  // The filtered right-hand side at time t, phases exp(i (t/eps) gap).
  ModeCoefficients filtered_rhs(const ModeCoefficients& x, double t, double eps, double nu, bool quadratic) const;
  ModeCoefficients masked(ModeCoefficients x) const;
  // exp(s K_N Delta'_L K_N) x.
  ModeCoefficients diffusion_exp(const ModeCoefficients& x, double s) const;

 private:
  struct ExpBlock {
    std::vector<std::size_t> modes;
    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;
  };

  double beta_;
  int n_max_, k_max_, n_ball_;
  double tol_;
  std::shared_ptr<Eigenbasis> basis_;
  std::vector<char> mask_;
  ResonantSet rs_;
  InteractionTensor limit_;
  std::optional<InteractionTensor> full_;
  DiffusionOperator diff_;
  std::vector<std::size_t> kernel_;
  std::vector<ExpBlock> blocks_;
  double max_tau_ = 0.0;
};

struct DiagnosticRecord {
  double t = 0.0;
  double l2 = 0.0;          // L2 norm of the state
  double hl1_perp = 0.0;    // H_L^1 norm of the ageostrophic part
  double dissipation = 0.0;  // 2 nu int_0^t (x | -Delta'_L x)
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ModeCoefficients> states;
  std::vector<DiagnosticRecord> diagnostics;
};

// Steps between saved states: max(1, round(0.01 / dt)).
long snapshot_stride(double dt);

Trajectory integrate_limit(const Model& model, const SolverConfig& cfg, const ModeCoefficients& mc0);
Trajectory integrate_limit(const SolverConfig& cfg, const ModeCoefficients& mc0);
// The remainder term of the filtered system is set to zero.
Trajectory integrate_filtered(const Model& model, const SolverConfig& cfg, const ModeCoefficients& mc0);
Trajectory integrate_filtered(const SolverConfig& cfg, const ModeCoefficients& mc0);

// exp(nu t G) v for the kernel band matrix G.
Eigen::VectorXcd geostrophic_solve(const GeostrophicDiffusion& g, const Eigen::VectorXcd& v, double nu, double t);
// Kernel matrix restricted to the first `count` kernel modes; built at size max(count, 6).
GeostrophicDiffusion kernel_diffusion(double beta, std::size_t count);

// Seeded smooth real data on the ball of `model`, damped by (1+n+k^2)^{-2}.
ModeCoefficients initial_data(const Model& model, std::uint64_t seed, double amplitude = 1.0);

struct SweepRow {
  double eps = 0.0;
  double sup_error = 0.0;            // sup_t ||Phi_eps - Phi||
  double sup_error_corrected = 0.0;  // against Phi' + eps phi_N with Phi' started at Phi0 - eps phi_N(0)
  double sup_kernel_error = 0.0;     // sup_t ||Pi_0 Phi_eps - geostrophic flow||
  double dt = 0.0;
};

struct ConvergenceReport {
  std::vector<SweepRow> rows;
  bool monotone = false;         // sup_error strictly decreasing in eps
  bool kernel_monotone = false;  // sup_kernel_error strictly decreasing
  double slope = 0.0;            // least-squares log-log slope of sup_error
  double kernel_slope = 0.0;
  bool corrector_helps = false;  // corrected <= plain at the smallest eps
};

// eps_list must be sorted decreasing. The limit trajectory is computed once.
ConvergenceReport convergence_sweep(const SolverConfig& base, const std::vector<double>& eps_list,
                                    const ModeCoefficients& mc0, bool with_corrector = true);

struct WeakLimitRow {
  double eps = 0.0;
  double sup_kernel_error = 0.0;
};

struct WeakLimitReport {
  std::vector<WeakLimitRow> rows;
  bool monotone = false;
  double slope = 0.0;
};

WeakLimitReport weak_limit_experiment(const SolverConfig& cfg, const ModeCoefficients& mc0,
                                      const std::vector<double>& eps_list);
// Same numbers read off a finished sweep.
WeakLimitReport weak_limit_from(const ConvergenceReport& r);

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace eqw
