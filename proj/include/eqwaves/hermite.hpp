#pragma once

#include <span>
#include <utility>
#include <vector>

namespace eqw {

// Nodes and weights for integrals against exp(-s*beta*x^2).
// `weights` integrate g against the Gaussian; `full_weights` integrate an
// integrand that already carries the Gaussian, i.e. full = weight * exp(s*beta*x^2).
struct QuadratureRule {
  double scale = 1.0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> full_weights;

  std::size_t size() const { return nodes.size(); }
};

// Golub-Welsch rule with `count` nodes for the weight exp(-scale*beta*x^2).
// Nodes are symmetric about zero to the last bit.
QuadratureRule gauss_hermite_rule(double beta, double scale, int count);

// Sum of full_weights[i]*f[i] taken in mirrored pairs, so odd integrands
// cancel exactly.
double integrate(const QuadratureRule& rule, std::span<const double> f);

class HermiteContext {
 public:
  HermiteContext(double beta, int n_max, std::vector<double> scales = {0.5, 1.0, 1.5},
                 int nodes_per_scale = 0);

  double beta() const { return beta_; }
  int n_max() const { return n_max_; }
  bool has_scale(double scale) const;
  const QuadratureRule& rule(double scale) const;
  const std::vector<QuadratureRule>& rules() const { return rules_; }

 private:
  double beta_;
  int n_max_;
  std::vector<QuadratureRule> rules_;
};

// psi_0..psi_n_max at x, written into out (size n_max+1).
void eval_psi_all(double beta, int n_max, double x, std::span<double> out);

double eval_psi(const HermiteContext& ctx, int n, double x);
double eval_dpsi(const HermiteContext& ctx, int n, double x);
double triple_product(const HermiteContext& ctx, int a, int b, int c);

// Coefficients of psi_{n-1} and psi_{n+1} in beta*x*psi_n.
std::pair<double, double> x_coupling(const HermiteContext& ctx, int n);

// All integrals of psi_a psi_b psi_c with indices up to ctx.n_max().
// Entries with odd index sum are stored as exact zeros.
class TripleProductTable {
 public:
  explicit TripleProductTable(const HermiteContext& ctx);

  int limit() const { return limit_; }
  double operator()(int a, int b, int c) const {
    return data_[(static_cast<std::size_t>(a) * (limit_ + 1) + b) * (limit_ + 1) + c];
  }

 private:
  int limit_;
  std::vector<double> data_;
};

}  // namespace eqw
