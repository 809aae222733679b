#include "eqwaves/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eqwaves/error.hpp"
#include "eqwaves/hermite.hpp"

namespace eqw {

namespace {

using Sparse = std::vector<std::pair<int, cplx>>;

const cplx I(0.0, 1.0);

Sparse derivative(double beta, const Sparse& f) {
  Sparse out;
  const double s = std::sqrt(beta / 2);
  for (const auto& [n, v] : f) {
    if (n > 0) out.push_back({n - 1, s * std::sqrt(double(n)) * v});
    out.push_back({n + 1, -s * std::sqrt(double(n + 1)) * v});
  }
  return out;
}

// Coefficients of (d11 - k^2) applied to a sparse hermite vector.
Sparse laplacian(double beta, int k, const Sparse& f) {
  Sparse out;
  for (const auto& [n, v] : f) {
    const double h = beta / 2;
    if (n >= 2) out.push_back({n - 2, h * std::sqrt(double(n) * (n - 1)) * v});
    out.push_back({n, (-h * (2 * n + 1) - double(k) * k) * v});
    out.push_back({n + 2, h * std::sqrt(double(n + 1) * (n + 2)) * v});
  }
  return out;
}

cplx dot(const Sparse& a, const Sparse& b) {
  cplx s{};
  for (const auto& [n, v] : a)
    for (const auto& [m, w] : b)
      if (n == m) s += std::conj(v) * w;
  return s;
}

struct ModeData {
  int k = 0;
  int parity = 1;  // reflection x1 -> -x1 parity of (eta, -u1, u2)
  Sparse eta, u1, u2, d_eta, d_u1, d_u2;
};

std::vector<ModeData> mode_data(const Eigenbasis& basis) {
  std::vector<ModeData> out(basis.space().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const EigenMode& e = basis.mode(i);
    ModeData& d = out[i];
    d.k = e.k();
    d.eta = e.coeffs[0];
    d.u1 = e.coeffs[1];
    d.u2 = e.coeffs[2];
    d.d_eta = derivative(basis.beta(), d.eta);
    d.d_u1 = derivative(basis.beta(), d.u1);
    d.d_u2 = derivative(basis.beta(), d.u2);
    d.parity = (d.eta.front().first % 2 == 0) ? 1 : -1;
  }
  return out;
}

class TripleSum {
 public:
  explicit TripleSum(const Eigenbasis& basis)
      : ctx_(basis.beta(), basis.n_max() + 2, {1.5}), table_(ctx_) {}

  // (2 pi)^{-1/2} sum conj(w_m) f_p g_q int psi_m psi_p psi_q
  cplx operator()(const Sparse& w, const Sparse& f, const Sparse& g) const {
    cplx s{};
    for (const auto& [m, wv] : w) {
      const cplx cw = std::conj(wv);
      for (const auto& [p, fv] : f) {
        const cplx cwf = cw * fv;
        for (const auto& [q, gv] : g) {
          if ((m + p + q) % 2) continue;
          s += cwf * gv * table_(m, p, q);
        }
      }
    }
    return s * kInvSqrt2Pi;
  }

 private:
  static constexpr double kInvSqrt2Pi = 0.3989422804014327;
  HermiteContext ctx_;
  TripleProductTable table_;
};

// (Psi_a | Qtilde(Psi_b, Psi_c)) with Qtilde(Phi, Psi) = (div(eta_Phi u_Psi), (u_Phi . grad) u_Psi).
cplx directional(const TripleSum& T, const ModeData& a, const ModeData& b, const ModeData& c) {
  cplx s = -T(a.d_eta, b.eta, c.u1) + I * double(a.k) * T(a.eta, b.eta, c.u2);
  s += T(a.u1, b.u1, c.d_u1) + I * double(c.k) * T(a.u1, b.u2, c.u1);
  s += T(a.u2, b.u1, c.d_u2) + I * double(c.k) * T(a.u2, b.u2, c.u2);
  return s;
}

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void check_space(const InteractionTensor& t, const ModeCoefficients& x, const ModeCoefficients& y) {
  if (!t.matches(x.space()) || !t.matches(y.space()) || !x.compatible(y))
    throw TruncationMismatch("interaction tensor and coefficients use different truncations");
}

}  // namespace

std::vector<char> truncation_mask(const ModeSpace& space, Truncation kind, int N) {
  if (N < 0) throw InvalidArgument("truncation radius must be nonnegative");
  std::vector<char> m(space.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    ModeIndex x = space.mode(i);
    if (kind == Truncation::Ball)
      m[i] = static_cast<long>(x.n) + static_cast<long>(x.k) * x.k <= static_cast<long>(N) * N;
    else
      m[i] = x.n <= N && std::abs(x.k) <= N;
  }
  return m;
}

void apply_mask(ModeCoefficients& mc, const std::vector<char>& mask) {
  if (mask.size() != mc.size()) throw TruncationMismatch("mask size does not match the mode space");
  for (std::size_t i = 0; i < mc.size(); ++i)
    if (!mask[i]) mc[i] = 0.0;
}

InteractionTensor::InteractionTensor(const Eigenbasis& basis, Kind kind, double tol, const std::vector<char>* mask)
    : kind_(kind), beta_(basis.beta()), n_max_(basis.n_max()), k_max_(basis.k_max()), tol_(tol) {
  const ModeSpace& space = basis.space();
  if (mask && mask->size() != space.size()) throw TruncationMismatch("mask size does not match the mode space");
  auto kept = [&](std::size_t i) { return !mask || (*mask)[i]; };
  const std::vector<ModeData> md = mode_data(basis);
  const TripleSum T(basis);
  rows_.assign(space.size(), {});
  auto entry = [&](std::size_t a, std::size_t b, std::size_t c) {
    return 0.5 * (directional(T, md[a], md[b], md[c]) + directional(T, md[a], md[c], md[b]));
  };
  if (kind == Kind::Resonant) {
    ResonantSet rs(space, tol);
    for (const TriadRecord& r : rs.records()) {
      std::size_t b = space.index(r.a), c = space.index(r.b), a = space.index(r.c);
      if (b > c) continue;
      if (!kept(a) || !kept(b) || !kept(c)) continue;
      if (md[a].parity != md[b].parity * md[c].parity) continue;
      cplx v = entry(a, b, c);
      if (v != cplx{}) rows_[a].push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c), v});
    }
    for (auto& row : rows_)
      std::sort(row.begin(), row.end(), [](const TensorEntry& x, const TensorEntry& y) {
        return x.b != y.b ? x.b < y.b : x.c < y.c;
      });
    return;
  }
  const int K = k_max_;
  const std::size_t per_k = 3 * static_cast<std::size_t>(n_max_ + 1);
  for (std::size_t a = 0; a < space.size(); ++a) {
    if (!kept(a)) continue;
    const int ka = md[a].k;
    for (int kb = -K; kb <= K; ++kb) {
      const int kc = ka - kb;
      if (kc < -K || kc > K) continue;
      const std::size_t b0 = (kb + K) * per_k, c0 = (kc + K) * per_k;
      for (std::size_t b = b0; b < b0 + per_k; ++b) {
        if (!kept(b)) continue;
        for (std::size_t c = std::max(b, c0); c < c0 + per_k; ++c) {
          if (!kept(c) || md[a].parity != md[b].parity * md[c].parity) continue;
          cplx v = entry(a, b, c);
          if (v != cplx{}) rows_[a].push_back({static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c), v});
        }
      }
    }
  }
}

std::size_t InteractionTensor::nnz() const {
  std::size_t s = 0;
  for (const auto& r : rows_) s += r.size();
  return s;
}

cplx InteractionTensor::value(std::size_t a, std::size_t b, std::size_t c) const {
  if (b > c) std::swap(b, c);
  const auto& r = rows_.at(a);
  auto it = std::lower_bound(r.begin(), r.end(), std::pair{b, c}, [](const TensorEntry& e, const auto& key) {
    return e.b != key.first ? e.b < key.first : e.c < key.second;
  });
  if (it != r.end() && it->b == b && it->c == c) return it->value;
  return {};
}

InteractionTensor InteractionTensor::restricted(const ResonantSet& rs) const {
  if (rs.beta() != beta_ || rs.n_max() != n_max_ || rs.k_max() != k_max_)
    throw ConfigurationError("resonant set was built for a different beta or truncation");
  InteractionTensor out = *this;
  out.kind_ = Kind::Resonant;
  out.tol_ = rs.tol();
  for (std::size_t a = 0; a < rows_.size(); ++a) {
    auto& row = out.rows_[a];
    row.erase(std::remove_if(row.begin(), row.end(),
                             [&](const TensorEntry& e) { return !rs.contains(e.b, e.c, a) && !rs.contains(e.c, e.b, a); }),
              row.end());
  }
  return out;
}

void InteractionTensor::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tensor file " + path.string());
  out << "eqwaves-interaction-tensor " << kTensorFormatVersion << "\n";
  out << "beta " << hex(beta_) << " n_max " << n_max_ << " k_max " << k_max_ << " kind "
      << (kind_ == Kind::Full ? "full" : "resonant") << " tol " << hex(tol_) << " modes " << rows_.size() << " nnz "
      << nnz() << "\n";
  for (std::uint32_t a = 0; a < rows_.size(); ++a)
    for (const TensorEntry& e : rows_[a]) {
      double re = e.value.real(), im = e.value.imag();
      out.write(reinterpret_cast<const char*>(&a), sizeof a);
      out.write(reinterpret_cast<const char*>(&e.b), sizeof e.b);
      out.write(reinterpret_cast<const char*>(&e.c), sizeof e.c);
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  if (!out) throw IoError("failed writing tensor file " + path.string());
}

InteractionTensor InteractionTensor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read tensor file " + path.string());
  std::string magic, line;
  int version = 0;
  in >> magic >> version;
  std::getline(in, line);
  if (magic != "eqwaves-interaction-tensor" || version != kTensorFormatVersion)
    throw IoError("unsupported tensor file " + path.string());
  std::getline(in, line);
  std::istringstream hs(line);
  std::string key, beta_s, kind_s, tol_s;
  InteractionTensor t;
  std::size_t modes = 0, nnz = 0;
  hs >> key >> beta_s >> key >> t.n_max_ >> key >> t.k_max_ >> key >> kind_s >> key >> tol_s >> key >> modes >> key >>
      nnz;
  if (!hs) throw IoError("malformed tensor header in " + path.string());
  t.beta_ = std::strtod(beta_s.c_str(), nullptr);
  t.tol_ = std::strtod(tol_s.c_str(), nullptr);
  t.kind_ = kind_s == "full" ? Kind::Full : Kind::Resonant;
  t.rows_.assign(modes, {});
  for (std::size_t i = 0; i < nnz; ++i) {
    std::uint32_t a, b, c;
    double re, im;
    in.read(reinterpret_cast<char*>(&a), sizeof a);
    in.read(reinterpret_cast<char*>(&b), sizeof b);
    in.read(reinterpret_cast<char*>(&c), sizeof c);
    in.read(reinterpret_cast<char*>(&re), sizeof re);
    in.read(reinterpret_cast<char*>(&im), sizeof im);
    if (!in || a >= modes) throw IoError("truncated tensor file " + path.string());
    t.rows_[a].push_back({b, c, cplx(re, im)});
  }
  return t;
}

std::filesystem::path tensor_cache_dir() {
  if (const char* d = std::getenv("EQWAVES_CACHE_DIR"); d && *d) return d;
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "eqwaves";
  return ".eqwaves-cache";
}

std::filesystem::path tensor_cache_path(const ModeSpace& space, InteractionTensor::Kind kind, double tol) {
  std::string name = "tensor-v" + std::to_string(kTensorFormatVersion) + "-b" + hex(space.beta()) + "-n" +
                     std::to_string(space.n_max()) + "-k" + std::to_string(space.k_max()) +
                     (kind == InteractionTensor::Kind::Full ? "-full" : "-resonant-t" + hex(tol)) + ".bin";
  return tensor_cache_dir() / name;
}

InteractionTensor load_or_build_tensor(const Eigenbasis& basis, InteractionTensor::Kind kind, double tol) {
  const auto path = tensor_cache_path(basis.space(), kind, tol);
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    try {
      InteractionTensor t = InteractionTensor::load(path);
      if (t.matches(basis.space()) && t.kind() == kind && t.modes() == basis.space().size() &&
          (kind == InteractionTensor::Kind::Full || t.tol() == tol))
        return t;
    } catch (const IoError&) {
    }
  }
  InteractionTensor t(basis, kind, tol);
  std::filesystem::create_directories(path.parent_path(), ec);
  try {
    t.save(path);
  } catch (const IoError&) {
    // The cache is an optimization; an unwritable directory is not fatal.
  }
  return t;
}

ModeCoefficients q_apply(const InteractionTensor& t, const ModeCoefficients& x, const ModeCoefficients& y) {
  check_space(t, x, y);
  ModeCoefficients out(x.space_ptr(), x.is_real() && y.is_real());
  for (std::size_t a = 0; a < t.modes(); ++a) {
    cplx s{};
    for (const TensorEntry& e : t.row(a)) {
      if (e.b == e.c)
        s += e.value * x[e.b] * y[e.b];
      else
        s += e.value * (x[e.b] * y[e.c] + x[e.c] * y[e.b]);
    }
    out[a] = s;
  }
  if (out.is_real()) out.enforce_reality();
  return out;
}

ModeCoefficients q_l_apply(const InteractionTensor& t, const ResonantSet& rs, const ModeCoefficients& x,
                           const ModeCoefficients& y) {
  check_space(t, x, y);
  rs.check_compatible(x.space());
  if (t.kind() == InteractionTensor::Kind::Resonant && t.tol() == rs.tol()) return q_apply(t, x, y);
  return q_apply(t.restricted(rs), x, y);
}

ModeCoefficients q_apply_quadrature(const Eigenbasis& basis, const ModeCoefficients& x, const ModeCoefficients& y) {
  const int N = basis.n_max(), K = basis.k_max();
  const double beta = basis.beta();
  const QuadratureRule rule = gauss_hermite_rule(beta, 1.5, 2 * N + 10);
  const int M = 4 * K + 4;
  struct Grid {
    PhysicalField v, d1v, d2v;
  };
  auto grids = [&](const ModeCoefficients& mc) {
    SpectralField f = basis.to_field(mc);
    return Grid{synthesize(f, rule.nodes, M), synthesize(d1(f), rule.nodes, M),
                synthesize(d2(f), rule.nodes, M)};
  };
  const Grid gx = grids(x), gy = grids(y);
  const std::size_t nx = rule.size();
  auto directional_q = [&](const Grid& p, const Grid& q) {
    // eta_p u_q (two fluxes) and the advection of u_q by u_p.
    PhysicalField flux{rule.nodes, M, std::vector<cplx>(3 * nx * M)};
    PhysicalField adv{rule.nodes, M, std::vector<cplx>(3 * nx * M)};
    for (std::size_t i = 0; i < nx; ++i)
      for (int m = 0; m < M; ++m) {
        const cplx eta = p.v.at(0, i, m), u1 = p.v.at(1, i, m), u2 = p.v.at(2, i, m);
        flux.at(1, i, m) = eta * q.v.at(1, i, m);
        flux.at(2, i, m) = eta * q.v.at(2, i, m);
        for (int c = 1; c <= 2; ++c) adv.at(c, i, m) = u1 * q.d1v.at(c, i, m) + u2 * q.d2v.at(c, i, m);
      }
    SpectralField fs = analyze(flux, rule, beta, N + 2, K);
    SpectralField div = d1(fs);
    SpectralField dy = d2(fs);
    SpectralField out = analyze(adv, rule, beta, N + 1, K);
    for (int n = 0; n <= N + 1; ++n)
      for (int k = -K; k <= K; ++k) out.at(0, n, k) = div.get(1, n, k) + dy.get(2, n, k);
    return out;
  };
  SpectralField q = directional_q(gx, gy);
  q += directional_q(gy, gx);
  q *= 0.5;
  ModeCoefficients out = basis.decompose(q);
  out.set_real(x.is_real() && y.is_real());
  if (out.is_real()) out.enforce_reality();
  return out;
}

SpectralField delta_prime(const SpectralField& f, Overflow policy) {
  if (policy == Overflow::Clamp) {
    for (int c = 1; c < 3; ++c)
      for (int n = std::max(0, f.n_max() - 1); n <= f.n_max(); ++n)
        for (int k = -f.k_max(); k <= f.k_max(); ++k)
          if (f.at(c, n, k) != cplx{})
            throw TruncationOverflow("applying Delta' would spill past hermite index " + std::to_string(f.n_max()));
  }
  SpectralField xx = d11(f);
  SpectralField out(f.beta(), f.n_max() + 2, f.k_max(), f.is_real());
  for (int c = 1; c < 3; ++c)
    for (int n = 0; n <= out.n_max(); ++n)
      for (int k = -f.k_max(); k <= f.k_max(); ++k)
        out.at(c, n, k) = xx.get(c, n, k) - double(k) * k * f.get(c, n, k);
  if (policy == Overflow::Clamp) return out.resized(f.n_max(), f.k_max());
  return out;
}

DiffusionOperator::DiffusionOperator(const Eigenbasis& basis, double group_tol) : space_(basis.space_ptr()) {
  const ModeSpace& s = *space_;
  const int K = s.k_max();
  dim_k_ = 3 * (s.n_max() + 1);
  by_k_.resize(2 * K + 1);
  diag_.assign(s.size(), 0.0);
  group_of_.assign(s.size(), 0);
  for (int k = -K; k <= K; ++k) {
    const std::size_t base = static_cast<std::size_t>(k + K) * dim_k_;
    std::vector<Sparse> lap1(dim_k_), lap2(dim_k_);
    for (int l = 0; l < dim_k_; ++l) {
      const EigenMode& e = basis.mode(base + l);
      lap1[l] = laplacian(s.beta(), k, e.coeffs[1]);
      lap2[l] = laplacian(s.beta(), k, e.coeffs[2]);
    }
    Eigen::MatrixXcd m(dim_k_, dim_k_);
    for (int r = 0; r < dim_k_; ++r) {
      const EigenMode& a = basis.mode(base + r);
      for (int c = 0; c < dim_k_; ++c) m(r, c) = dot(a.coeffs[1], lap1[c]) + dot(a.coeffs[2], lap2[c]);
    }
    m = 0.5 * (m + m.adjoint()).eval();
    by_k_[k + K] = m;
    for (int l = 0; l < dim_k_; ++l) diag_[base + l] = m(l, l).real();
    // Group modes of equal eigenvalue within this wavenumber.
    std::vector<std::size_t> order(dim_k_);
    for (int l = 0; l < dim_k_; ++l) order[l] = base + l;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.tau(a) < s.tau(b); });
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double t = s.tau(order[i]);
      if (i == 0 || std::abs(t - s.tau(order[i - 1])) > group_tol * std::max(1.0, std::abs(t)))
        groups_.push_back({});
      groups_.back().push_back(order[i]);
    }
  }
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    auto& modes = groups_[g];
    std::sort(modes.begin(), modes.end());
    Group blk;
    blk.modes = modes;
    const std::size_t sz = modes.size();
    blk.block.resize(sz, sz);
    const int k = s.mode(modes[0]).k;
    const std::size_t base = static_cast<std::size_t>(k + K) * dim_k_;
    for (std::size_t r = 0; r < sz; ++r) {
      group_of_[modes[r]] = g;
      for (std::size_t c = 0; c < sz; ++c) blk.block(r, c) = by_k_[k + K](modes[r] - base, modes[c] - base);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blk.block);
    blk.evals = es.eigenvalues();
    blk.evecs = es.eigenvectors();
    blocks_.push_back(std::move(blk));
  }
}

cplx DiffusionOperator::entry(std::size_t a, std::size_t b) const {
  const ModeSpace& s = *space_;
  const int ka = s.mode(a).k, kb = s.mode(b).k;
  if (ka != kb) return {};
  const std::size_t base = static_cast<std::size_t>(ka + s.k_max()) * dim_k_;
  return by_k_[ka + s.k_max()](a - base, b - base);
}

ModeCoefficients DiffusionOperator::apply(const ModeCoefficients& mc) const {
  if (!mc.space().same_as(*space_)) throw TruncationMismatch("diffusion operator built for another truncation");
  ModeCoefficients out(mc.space_ptr(), mc.is_real());
  for (std::size_t kk = 0; kk < by_k_.size(); ++kk) {
    const std::size_t base = kk * dim_k_;
    Eigen::Map<const Eigen::VectorXcd> in(mc.data().data() + base, dim_k_);
    Eigen::Map<Eigen::VectorXcd> res(out.data().data() + base, dim_k_);
    res = by_k_[kk] * in;
  }
  if (out.is_real()) out.enforce_reality();
  return out;
}

ModeCoefficients DiffusionOperator::apply_L(const ModeCoefficients& mc) const {
  if (!mc.space().same_as(*space_)) throw TruncationMismatch("diffusion operator built for another truncation");
  ModeCoefficients out(mc.space_ptr(), mc.is_real());
  for (const Group& g : blocks_) {
    if (g.modes.size() == 1) {
      out[g.modes[0]] = g.block(0, 0) * mc[g.modes[0]];
      continue;
    }
    Eigen::VectorXcd v(g.modes.size());
    for (std::size_t i = 0; i < g.modes.size(); ++i) v[i] = mc[g.modes[i]];
    Eigen::VectorXcd r = g.block * v;
    for (std::size_t i = 0; i < g.modes.size(); ++i) out[g.modes[i]] = r[i];
  }
  if (out.is_real()) out.enforce_reality();
  return out;
}

ModeCoefficients DiffusionOperator::exp_L(const ModeCoefficients& mc, double s) const {
  if (!mc.space().same_as(*space_)) throw TruncationMismatch("diffusion operator built for another truncation");
  ModeCoefficients out(mc.space_ptr(), mc.is_real());
  for (const Group& g : blocks_) {
    if (g.modes.size() == 1) {
      out[g.modes[0]] = std::exp(s * g.block(0, 0).real()) * mc[g.modes[0]];
      continue;
    }
    Eigen::VectorXcd v(g.modes.size());
    for (std::size_t i = 0; i < g.modes.size(); ++i) v[i] = mc[g.modes[i]];
    Eigen::VectorXcd w = g.evecs.adjoint() * v;
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] *= std::exp(s * g.evals[i]);
    Eigen::VectorXcd r = g.evecs * w;
    for (std::size_t i = 0; i < g.modes.size(); ++i) out[g.modes[i]] = r[i];
  }
  if (out.is_real()) out.enforce_reality();
  return out;
}

double DiffusionOperator::dissipation(const ModeCoefficients& mc) const { return -inner(mc, apply_L(mc)).real(); }

double DiffusionOperator::dissipation(const ModeCoefficients& mc, double s) const {
  ModeCoefficients d = apply_L(mc);
  double acc = 0;
  for (std::size_t i = 0; i < mc.size(); ++i) {
    ModeIndex m = space_->mode(i);
    acc += std::pow(1.0 + m.n + double(m.k) * m.k, s) * (std::conj(mc[i]) * -d[i]).real();
  }
  return acc;
}

ModeCoefficients delta_prime(const DiffusionOperator& d, const ModeCoefficients& mc) { return d.apply(mc); }
ModeCoefficients delta_prime_l_apply(const DiffusionOperator& d, const ModeCoefficients& mc) { return d.apply_L(mc); }

double geostrophic_alpha(double beta, int n, int offset) {
  if (n < 1) throw InvalidArgument("closed-form geostrophic bands need n >= 1");
  const double x = n, q = beta / 4;
  switch (offset) {
    case -4: return -q * std::sqrt((x - 4) * (x - 2) * (x - 1) * (x + 1) / ((2 * x + 1) * (2 * x - 7)));
    case -2: return q * (4 * x - 2) * std::sqrt((x - 2) * (x + 1) / ((2 * x + 1) * (2 * x - 3)));
    case 0: return -q * (6 * x * x + 6 * x - 1) / (2 * x + 1);
    case 2: return q * (4 * x + 6) * std::sqrt(x * (x + 3) / ((2 * x + 1) * (2 * x + 5)));
    case 4: return -q * std::sqrt(x * (x + 2) * (x + 3) * (x + 5) / ((2 * x + 1) * (2 * x + 9)));
    default: throw InvalidArgument("geostrophic band offset must be one of -4,-2,0,2,4");
  }
}

double geostrophic_quadrature_entry(double beta, int m, int n) {
  if (m < 0 || n < 0) throw InvalidArgument("negative kernel index");
  const Sparse um = build_mode(beta, {m, 0, 0}).coeffs[2];
  const Sparse un = build_mode(beta, {n, 0, 0}).coeffs[2];
  const int top = std::max(m, n) + 2;
  const QuadratureRule rule = gauss_hermite_rule(beta, 1.0, top + 8);
  std::vector<double> psi(top + 1), vals(rule.size());
  auto deriv = [&](const Sparse& u) {
    double s = 0;
    for (const auto& [h, v] : u) {
      double d = (h > 0 ? std::sqrt(double(h)) * psi[h - 1] : 0.0) - std::sqrt(double(h + 1)) * psi[h + 1];
      s += v.real() * std::sqrt(beta / 2) * d;
    }
    return s;
  };
  for (std::size_t i = 0; i < rule.size(); ++i) {
    eval_psi_all(beta, top, rule.nodes[i], psi);
    vals[i] = -deriv(um) * deriv(un);
  }
  return integrate(rule, vals);
}

GeostrophicDiffusion geostrophic_diffusion(double beta, int n_kernel_max) {
  if (!(beta > 0)) throw InvalidArgument("beta must be positive");
  if (n_kernel_max < 5) throw InvalidArgument("geostrophic diffusion needs n_kernel_max >= 5");
  GeostrophicDiffusion g;
  g.beta = beta;
  g.n_max = n_kernel_max;
  const int D = n_kernel_max + 1;
  g.matrix = Eigen::MatrixXd::Zero(D, D);
  for (int n = 0; n < D; ++n)
    for (int m = std::max(0, n - 4); m <= std::min(n_kernel_max, n + 4); ++m) {
      const int off = m - n;
      const bool closed = n >= 4 && m >= 1 && off % 2 == 0;
      g.matrix(m, n) = closed ? geostrophic_alpha(beta, n, off) : geostrophic_quadrature_entry(beta, m, n);
    }
  return g;
}

Eigen::VectorXcd ns_commutator_apply(const GeostrophicDiffusion& g, double s, const Eigen::VectorXcd& v) {
  if (v.size() != g.matrix.rows()) throw TruncationMismatch("kernel vector size does not match the band matrix");
  Eigen::VectorXd w(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) w[n] = std::pow(1.0 + n, s);
  Eigen::VectorXcd nv = w.asDiagonal() * v;
  Eigen::VectorXcd gv = g.matrix * v;
  return w.asDiagonal() * gv - g.matrix * nv;
}

double ns_commutator_check(const GeostrophicDiffusion& g, double s, std::span<const cplx> kernel_coeffs) {
  Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(kernel_coeffs.data(), kernel_coeffs.size());
  Eigen::VectorXd w(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) w[n] = std::pow(1.0 + n, s);
  const double den = (w.asDiagonal() * v).norm();
  if (den == 0.0) throw UndefinedRatio("commutator ratio is undefined for a zero kernel field");
  return ns_commutator_apply(g, s, v).norm() / den;
}

ModeCoefficients corrector(const InteractionTensor& t, const ResonantSet& rs, const DiffusionOperator& d,
                           const ModeCoefficients& mc_N, const std::vector<char>& inputs, double eps, double time,
                           double nu) {
  if (!(eps > 0)) throw InvalidArgument("eps must be positive");
  if (t.kind() != InteractionTensor::Kind::Full) throw ConfigurationError("corrector needs the full interaction tensor");
  check_space(t, mc_N, mc_N);
  rs.check_compatible(mc_N.space());
  const ModeSpace& s = mc_N.space();
  if (inputs.size() != s.size()) throw TruncationMismatch("input mask size does not match the mode space");
  const double theta = time / eps;
  ModeCoefficients out(mc_N.space_ptr(), mc_N.is_real());
  for (std::size_t a = 0; a < s.size(); ++a) {
    cplx acc{};
    for (const TensorEntry& e : t.row(a)) {
      if (!inputs[e.b] || !inputs[e.c]) continue;
      if (rs.contains(e.b, e.c, a) || rs.contains(e.c, e.b, a)) continue;
      const double gap = s.tau(a) - s.tau(e.b) - s.tau(e.c);
      if (std::abs(gap) < resonance_threshold(rs.tol(), s.tau(a), s.tau(e.b), s.tau(e.c)))
        throw InternalConsistency("near-zero phase gap outside the resonant set");
      cplx prod = e.b == e.c ? mc_N[e.b] * mc_N[e.b] : mc_N[e.b] * mc_N[e.c] + mc_N[e.c] * mc_N[e.b];
      acc -= e.value * prod * std::exp(I * theta * gap) / (I * gap);
    }
    if (nu != 0.0) {
      const int k = s.mode(a).k;
      const std::size_t base = static_cast<std::size_t>(k + s.k_max()) * 3 * (s.n_max() + 1);
      for (std::size_t b = base; b < base + 3 * static_cast<std::size_t>(s.n_max() + 1); ++b) {
        if (!inputs[b] || d.group_of(b) == d.group_of(a) || mc_N[b] == cplx{}) continue;
        const double gap = s.tau(a) - s.tau(b);
        acc += nu * d.entry(a, b) * mc_N[b] * std::exp(I * theta * gap) / (I * gap);
      }
    }
    out[a] = acc;
  }
  if (out.is_real()) out.enforce_reality();
  return out;
}

}  // namespace eqw
