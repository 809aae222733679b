#include "eqwaves/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

#include "eqwaves/error.hpp"

namespace eqw {

namespace {

constexpr double kRescale = 1e150;
const double kLogRescale = std::log(kRescale);

// Unit-norm Hermite functions h_0..h_n at y. The polynomial part runs with
// a running exponent so large |y| never overflows before the Gaussian is applied.
void hermite_functions(int n, double y, double* out) {
  const double base = std::pow(std::numbers::pi, -0.25);
  double log_scale = 0.0;
  double prev = 0.0;
  double cur = 1.0;
  thread_local std::vector<double> logs;
  logs.resize(n + 1);
  double* poly = out;
  poly[0] = cur;
  logs[0] = 0.0;
  for (int m = 0; m < n; ++m) {
    double next = std::sqrt(2.0 / (m + 1)) * y * cur - std::sqrt(static_cast<double>(m) / (m + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > kRescale) {
      cur /= kRescale;
      prev /= kRescale;
      log_scale += kLogRescale;
    }
    poly[m + 1] = cur;
    logs[m + 1] = log_scale;
  }
  const double g = -0.5 * y * y;
  for (int m = 0; m <= n; ++m) {
    double e = g + logs[m];
    double v = e < -745.0 ? 0.0 : base * poly[m] * std::exp(e);
    if (std::abs(v) < DBL_MIN) v = 0.0;
    out[m] = v;
  }
}

void check_index(const HermiteContext& ctx, int n) {
  if (n < 0 || n > ctx.n_max())
    throw IndexOutOfRange("hermite index " + std::to_string(n) + " outside [0, " +
                          std::to_string(ctx.n_max()) + "]");
}

}  // namespace

void eval_psi_all(double beta, int n_max, double x, std::span<double> out) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite abscissa");
  if (static_cast<int>(out.size()) < n_max + 1) throw InvalidArgument("output span too short");
  hermite_functions(n_max, std::sqrt(beta) * x, out.data());
  const double s = std::pow(beta, 0.25);
  for (int m = 0; m <= n_max; ++m) out[m] *= s;
}

QuadratureRule gauss_hermite_rule(double beta, double scale, int count) {
  if (!(beta > 0) || !(scale > 0) || count < 1) throw InvalidArgument("bad quadrature parameters");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(std::max(count - 1, 0));
  for (int i = 1; i < count; ++i) sub[i - 1] = std::sqrt(i / 2.0);
  std::vector<double> y(count, 0.0);
  if (count > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    for (int i = 0; i < count; ++i) y[i] = es.eigenvalues()[i];
  }
  std::vector<double> h(count + 1);
  // Newton polish on h_count, then mirror so the rule is exactly symmetric.
  for (int i = 0; i < count; ++i) {
    for (int it = 0; it < 3; ++it) {
      hermite_functions(count, y[i], h.data());
      double d = std::sqrt(2.0 * count) * h[count - 1] - y[i] * h[count];
      if (d == 0.0) break;
      double step = h[count] / d;
      y[i] -= step;
      if (std::abs(step) < 1e-16 * (1 + std::abs(y[i]))) break;
    }
  }
  std::sort(y.begin(), y.end());
  for (int i = 0; i < count / 2; ++i) {
    double m = 0.5 * (y[count - 1 - i] - y[i]);
    y[i] = -m;
    y[count - 1 - i] = m;
  }
  if (count % 2 == 1) y[count / 2] = 0.0;

  QuadratureRule r;
  r.scale = scale;
  r.nodes.resize(count);
  r.weights.resize(count);
  r.full_weights.resize(count);
  const double a = scale * beta;
  const double jac = 1.0 / std::sqrt(a);
  for (int i = 0; i < count; ++i) {
    hermite_functions(count - 1, y[i], h.data());
    double s = 0.0;
    for (int m = 0; m < count; ++m) s += h[m] * h[m];
    double lam = 1.0 / s;
    r.nodes[i] = y[i] * jac;
    r.full_weights[i] = lam * jac;
    r.weights[i] = lam * jac * std::exp(-y[i] * y[i]);
  }
  for (int i = 0; i < count / 2; ++i) {
    r.full_weights[count - 1 - i] = r.full_weights[i];
    r.weights[count - 1 - i] = r.weights[i];
  }
  return r;
}

double integrate(const QuadratureRule& rule, std::span<const double> f) {
  const std::size_t n = rule.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n / 2; ++i) {
    std::size_t j = n - 1 - i;
    s += rule.full_weights[i] * (f[i] + f[j]);
  }
  if (n % 2 == 1) s += rule.full_weights[n / 2] * f[n / 2];
  return s;
}

HermiteContext::HermiteContext(double beta, int n_max, std::vector<double> scales, int nodes_per_scale)
    : beta_(beta), n_max_(n_max) {
  if (!(beta > 0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
  if (n_max < 1) throw InvalidArgument("n_max must be at least 1");
  int count = std::max(nodes_per_scale, 2 * n_max + 4);
  for (double s : scales) rules_.push_back(gauss_hermite_rule(beta, s, count));
}

bool HermiteContext::has_scale(double scale) const {
  return std::any_of(rules_.begin(), rules_.end(), [&](const QuadratureRule& r) { return r.scale == scale; });
}

const QuadratureRule& HermiteContext::rule(double scale) const {
  for (const auto& r : rules_)
    if (r.scale == scale) return r;
  throw ConfigurationError("weight scale " + std::to_string(scale) + " not in context");
}

double eval_psi(const HermiteContext& ctx, int n, double x) {
  check_index(ctx, n);
  std::vector<double> v(n + 1);
  eval_psi_all(ctx.beta(), n, x, v);
  return v[n];
}

double eval_dpsi(const HermiteContext& ctx, int n, double x) {
  check_index(ctx, n);
  std::vector<double> v(n + 2);
  eval_psi_all(ctx.beta(), n + 1, x, v);
  const double b = ctx.beta();
  double lower = n > 0 ? std::sqrt(2.0 * b * n) * v[n - 1] : 0.0;
  return 0.5 * (lower - std::sqrt(2.0 * b * (n + 1)) * v[n + 1]);
}

double triple_product(const HermiteContext& ctx, int a, int b, int c) {
  check_index(ctx, a);
  check_index(ctx, b);
  check_index(ctx, c);
  const QuadratureRule& r = ctx.rule(1.5);
  int top = std::max({a, b, c});
  std::vector<double> v(top + 1);
  std::vector<double> f(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    eval_psi_all(ctx.beta(), top, r.nodes[i], v);
    f[i] = v[a] * v[b] * v[c];
  }
  return integrate(r, f);
}

std::pair<double, double> x_coupling(const HermiteContext& ctx, int n) {
  const double b = ctx.beta();
  return {std::sqrt(b * n / 2.0), std::sqrt(b * (n + 1) / 2.0)};
}

TripleProductTable::TripleProductTable(const HermiteContext& ctx) : limit_(ctx.n_max()) {
  const int L = limit_ + 1;
  data_.assign(static_cast<std::size_t>(L) * L * L, 0.0);
  const QuadratureRule& r = ctx.rule(1.5);
  const std::size_t q = r.size();
  std::vector<double> psi(q * L);
  for (std::size_t i = 0; i < q; ++i) eval_psi_all(ctx.beta(), limit_, r.nodes[i], std::span<double>(&psi[i * L], L));
  std::vector<double> f(q);
  for (int a = 0; a < L; ++a)
    for (int b = a; b < L; ++b)
      for (int c = b; c < L; ++c) {
        if ((a + b + c) % 2 == 1) continue;
        for (std::size_t i = 0; i < q; ++i) f[i] = psi[i * L + a] * psi[i * L + b] * psi[i * L + c];
        double v = integrate(r, f);
        int idx[3] = {a, b, c};
        std::sort(idx, idx + 3);
        do {
          data_[(static_cast<std::size_t>(idx[0]) * L + idx[1]) * L + idx[2]] = v;
        } while (std::next_permutation(idx, idx + 3));
      }
}

}  // namespace eqw
