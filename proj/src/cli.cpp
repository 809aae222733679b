#include "eqwaves/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "eqwaves/dispersion.hpp"
#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/error.hpp"
#include "eqwaves/hermite.hpp"
#include "eqwaves/io.hpp"
#include "eqwaves/resonance.hpp"
#include "eqwaves/selftest.hpp"
#include "eqwaves/solver.hpp"
#include "eqwaves/version.hpp"

namespace eqw {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write failed for " + path);
}

std::string meta_line(const std::string& cmd, const std::string& rest) {
  return std::string("# eqwaves ") + kVersion + " " + cmd + " " + rest + "\n";
}

nlohmann::json mode_json(const ModeIndex& m) { return {m.n, m.k, m.j}; }

struct Options {
  double beta = 1.0;
  int n_max = 0;
  int k_max = 0;
  std::string output;
};

// --- dispersion ---

int cmd_dispersion(const Options& o, std::ostream& out) {
  std::ostringstream s;
  s << meta_line("dispersion", "beta=" + num(o.beta) + " n_max=" + std::to_string(o.n_max) +
                                   " k_max=" + std::to_string(o.k_max));
  s << "beta,n,k,j,tau,class\n";
  for (int n = 0; n <= o.n_max; ++n)
    for (int k = -o.k_max; k <= o.k_max; ++k) {
      const RootTriple r = roots(o.beta, n, k);
      for (int j = -1; j <= 1; ++j)
        s << num(o.beta) << ',' << n << ',' << k << ',' << j << ',' << num(r.tau(j)) << ','
          << to_string(classify(n, k, j)) << '\n';
    }
  emit(o.output, s.str(), out);
  return kExitOk;
}

// --- triads ---

struct TriadOptions {
  double tol = kDefaultResonanceTol;
  std::string sector = "all";
  std::string summary;
};

int cmd_triads(const Options& o, const TriadOptions& t, std::ostream& out) {
  const Sector sector = parse_sector(t.sector);
  const ScanReport r = scan_resonances(o.beta, o.n_max, o.k_max, t.tol, sector);
  nlohmann::json j;
  j["tool_version"] = kVersion;
  j["beta"] = o.beta;
  j["n_max"] = o.n_max;
  j["k_max"] = o.k_max;
  j["tol"] = t.tol;
  j["sector"] = std::string(to_string(sector));
  j["counts"] = {{"zero_mode", r.count_zero_mode},
                 {"all_kelvin", r.count_all_kelvin},
                 {"accidental", r.count_accidental}};
  j["max_kelvin_defect"] = r.max_kelvin_defect;
  if (r.min_nonexempt)
    j["min_nonexempt"] = {{"a", mode_json(r.min_nonexempt->a)},
                          {"b", mode_json(r.min_nonexempt->b)},
                          {"c", mode_json(r.min_nonexempt->c)},
                          {"defect", r.min_nonexempt->defect}};
  else
    j["min_nonexempt"] = nullptr;
  j["triads"] = nlohmann::json::array();
  std::optional<double> min_accidental;
  for (const auto& rec : r.records) {
    j["triads"].push_back({{"a", mode_json(rec.a)},
                           {"b", mode_json(rec.b)},
                           {"c", mode_json(rec.c)},
                           {"defect", rec.defect},
                           {"class", std::string(to_string(rec.classification))}});
    if (rec.classification == TriadClass::Accidental)
      min_accidental = std::min(min_accidental.value_or(INFINITY), std::abs(rec.defect));
  }
  emit(o.output, j.dump(2) + "\n", out);

  std::ostringstream s;
  s << meta_line("triads", "beta=" + num(o.beta) + " n_max=" + std::to_string(o.n_max) +
                               " k_max=" + std::to_string(o.k_max) + " tol=" + num(t.tol));
  s << "beta,zero_mode,all_kelvin,accidental,min_accidental_defect,min_nonexempt_defect\n";
  s << num(o.beta) << ',' << r.count_zero_mode << ',' << r.count_all_kelvin << ',' << r.count_accidental << ','
    << (min_accidental ? num(*min_accidental) : "") << ','
    << (r.min_nonexempt ? num(std::abs(r.min_nonexempt->defect)) : "") << '\n';
  std::string summary = t.summary;
  if (summary.empty() && !o.output.empty() && o.output != "-") summary = o.output + ".summary.csv";
  if (!summary.empty()) emit(summary, s.str(), out);
  return kExitOk;
}

// --- modes ---

struct ModeOptions {
  std::optional<int> n, k, j;
  int points = 81;
  double extent = 0.0;
};

int cmd_modes(const Options& o, const ModeOptions& m, std::ostream& out) {
  if (m.points < 2) throw InvalidArgument("--points must be at least 2");
  const double extent = m.extent > 0 ? m.extent : 5.0 / std::sqrt(o.beta);
  std::vector<double> psi(o.n_max + 2);
  std::ostringstream s;
  s << meta_line("modes", "beta=" + num(o.beta) + " n_max=" + std::to_string(o.n_max) +
                              " k_max=" + std::to_string(o.k_max) + " points=" + std::to_string(m.points));
  s << "n,k,j,tau,class,x1,eta_re,eta_im,u1_re,u1_im,u2_re,u2_im\n";
  const double norm = 1.0 / std::sqrt(2 * std::numbers::pi);
  for (int n = 0; n <= o.n_max; ++n)
    for (int k = -o.k_max; k <= o.k_max; ++k)
      for (int j = -1; j <= 1; ++j) {
        if ((m.n && *m.n != n) || (m.k && *m.k != k) || (m.j && *m.j != j)) continue;
        const ModeIndex idx{n, k, j};
        if (is_degenerate(o.beta, idx)) continue;
        const EigenMode e = build_mode(o.beta, idx);
        for (int p = 0; p < m.points; ++p) {
          const double x = -extent + 2 * extent * p / (m.points - 1);
          eval_psi_all(o.beta, o.n_max + 1, x, psi);
          s << n << ',' << k << ',' << j << ',' << num(e.tau) << ',' << to_string(classify(n, k, j)) << ','
            << num(x);
          for (int c = 0; c < 3; ++c) {
            cplx v{};
            for (const auto& [h, coef] : e.coeffs[c]) v += coef * psi[h];
            v *= norm;
            s << ',' << num(v.real()) << ',' << num(v.imag());
          }
          s << '\n';
        }
      }
  emit(o.output, s.str(), out);
  return kExitOk;
}

// --- simulate / converge ---

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& sets,
                          const std::set<std::string>& allowed) {
  RunConfig rc;
  if (!path.empty()) rc = RunConfig::load(path, allowed);
  for (const auto& kv : sets) {
    std::istringstream line(kv);
    RunConfig one = RunConfig::parse(line, allowed);
    for (const auto& [k, v] : one.values()) rc.set(k, v);
  }
  return rc;
}

std::set<std::string> with_solver_keys(std::initializer_list<std::string> extra) {
  std::set<std::string> s = solver_keys();
  s.insert(extra);
  return s;
}

int cmd_simulate(const std::string& config, const std::vector<std::string>& sets, const std::string& output,
                 std::ostream& out) {
  const RunConfig rc = load_run_config(config, sets, with_solver_keys({"system", "amplitude", "output"}));
  SolverConfig cfg;
  apply_solver_keys(rc, cfg);
  const std::string system = rc.get("system", "limit");
  if (system != "limit" && system != "filtered")
    throw ConfigurationError("'system' must be limit or filtered, got '" + system + "'");
  const bool filtered = system == "filtered";
  const std::string dir = output.empty() ? rc.get("output", "") : output;
  if (dir.empty()) throw ConfigurationError("simulate needs an output directory (--output or 'output =')");
  validate(cfg, filtered);
  const double amplitude = rc.get_double("amplitude", 1.0);
  Model model(cfg, filtered);
  const ModeCoefficients x0 = initial_data(model, cfg.seed, amplitude);
  const Trajectory tr = filtered ? integrate_filtered(model, cfg, x0) : integrate_limit(model, cfg, x0);
  write_trajectory(dir, tr, model.basis(), cfg, {{"system", system}, {"amplitude", amplitude}});
  const auto& last = tr.diagnostics.back();
  out << "simulate " << system << ": " << tr.diagnostics.size() - 1 << " steps, " << tr.states.size()
      << " snapshots, l2 " << num(tr.diagnostics.front().l2) << " -> " << num(last.l2) << ", dissipation "
      << num(last.dissipation) << "\n";
  return kExitOk;
}

int cmd_converge(const std::string& config, const std::vector<std::string>& sets, const std::string& output,
                 std::ostream& out) {
  const RunConfig rc =
      load_run_config(config, sets, with_solver_keys({"eps_list", "amplitude", "corrector", "output"}));
  SolverConfig cfg;
  cfg.n_ball = cfg.n_max = cfg.k_max = 1;
  cfg.nu = 0.1;
  apply_solver_keys(rc, cfg);
  validate(cfg, false);
  const std::vector<double> eps = rc.get_list("eps_list", {0.2, 0.1, 0.05});
  const bool corrector = rc.get_bool("corrector", true);
  const double amplitude = rc.get_double("amplitude", 1.0);
  Model model(cfg, false);
  const ConvergenceReport r = convergence_sweep(cfg, eps, initial_data(model, cfg.seed, amplitude), corrector);

  std::ostringstream s;
  s << meta_line("converge", "beta=" + num(cfg.beta) + " n_max=" + std::to_string(cfg.n_max) +
                                 " k_max=" + std::to_string(cfg.k_max) + " n_ball=" + std::to_string(cfg.n_ball) +
                                 " nu=" + num(cfg.nu) + " t_final=" + num(cfg.t_final) +
                                 " seed=" + std::to_string(cfg.seed) + " amplitude=" + num(amplitude));
  s << "eps,sup_error,sup_error_corrected,sup_kernel_error,dt\n";
  for (const auto& row : r.rows)
    s << num(row.eps) << ',' << num(row.sup_error) << ',' << (corrector ? num(row.sup_error_corrected) : "") << ','
      << num(row.sup_kernel_error) << ',' << num(row.dt) << '\n';
  const std::string path = output.empty() ? rc.get("output", "") : output;
  emit(path, s.str(), out);
  out << "# strong error " << (r.monotone ? "strictly decreasing" : "NOT decreasing") << ", slope " << num(r.slope)
      << "; kernel error " << (r.kernel_monotone ? "strictly decreasing" : "NOT decreasing") << ", slope "
      << num(r.kernel_slope);
  if (corrector) out << "; corrector " << (r.corrector_helps ? "helps" : "does NOT help");
  out << "\n";
  return r.monotone && r.kernel_monotone ? kExitOk : kExitCheck;
}

// --- selftest ---

int cmd_selftest(const std::string& only, std::ostream& out) {
  bool all = true, found = false;
  for (const Suite& s : selftest_suites()) {
    if (!only.empty() && s.name != only) continue;
    found = true;
    const SuiteResult r = run_suite(s);
    out << (r.ok ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    all = all && r.ok;
  }
  if (!found) throw InvalidArgument("unknown suite '" + only + "'");
  out << (all ? "selftest passed" : "selftest FAILED") << " (eqwaves " << kVersion << ")\n";
  return all ? kExitOk : kExitCheck;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equatorial-wave spectral toolkit: dispersion, resonances, eigenmodes and fast-rotation limits",
               "eqwaves"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Options o;
  auto add_common = [&](CLI::App* sub, bool need_trunc) {
    sub->add_option("--beta", o.beta, "betaplane parameter")->check(CLI::PositiveNumber)->required();
    auto* n = sub->add_option("--n-max", o.n_max, "largest Hermite index")->check(CLI::NonNegativeNumber);
    auto* k = sub->add_option("--k-max", o.k_max, "largest |k|")->check(CLI::NonNegativeNumber);
    if (need_trunc) {
      n->required();
      k->required();
    }
    sub->add_option("-o,--output", o.output, "output file (default stdout)");
  };

  auto* disp = app.add_subcommand("dispersion", "CSV table beta,n,k,j,tau,class");
  add_common(disp, true);

  TriadOptions topt;
  auto* tri = app.add_subcommand("triads", "resonant triads as JSON plus a CSV summary");
  add_common(tri, true);
  tri->add_option("--tol", topt.tol, "relative resonance tolerance")->check(CLI::PositiveNumber);
  tri->add_option("--sector", topt.sector, "all, kelvin, rossby, poincare, mixed or geostrophic");
  tri->add_option("--summary", topt.summary, "summary CSV path (default <output>.summary.csv)");

  ModeOptions mopt;
  auto* modes = app.add_subcommand("modes", "sampled eigenmode profiles at x2 = 0 as CSV");
  add_common(modes, true);
  modes->add_option("--n", mopt.n, "only this n");
  modes->add_option("--k", mopt.k, "only this k");
  modes->add_option("--j", mopt.j, "only this j")->check(CLI::Range(-1, 1));
  modes->add_option("--points", mopt.points, "samples in x1");
  modes->add_option("--extent", mopt.extent, "half-width of the x1 window (default 5/sqrt(beta))");

  std::string config, output, suite;
  std::vector<std::string> sets;
  auto* sim = app.add_subcommand("simulate", "integrate the limit or filtered system into a trajectory directory");
  sim->add_option("--config", config, "key = value run configuration");
  sim->add_option("--set", sets, "extra key=value, applied after the file");
  sim->add_option("-o,--output", output, "trajectory directory");

  auto* conv = app.add_subcommand("converge", "eps sweep of filtered against limit trajectories");
  conv->add_option("--config", config, "key = value run configuration");
  conv->add_option("--set", sets, "extra key=value, applied after the file");
  conv->add_option("-o,--output", output, "CSV path (default stdout)");

  auto* self = app.add_subcommand("selftest", "run the invariant suites");
  self->add_option("--suite", suite, "run a single suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*disp) return cmd_dispersion(o, out);
    if (*tri) return cmd_triads(o, topt, out);
    if (*modes) return cmd_modes(o, mopt, out);
    if (*sim) return cmd_simulate(config, sets, output, out);
    if (*conv) return cmd_converge(config, sets, output, out);
    if (*self) return cmd_selftest(suite, out);
  } catch (const IoError& e) {
    err << "eqwaves: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigurationError& e) {
    err << "eqwaves: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "eqwaves: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InstabilityError& e) {
    err << "eqwaves: instability: " << e.what() << "\n";
    return kExitCheck;
  } catch (const std::exception& e) {
    err << "eqwaves: " << e.what() << "\n";
    return kExitCheck;
  }
  return kExitUsage;
}

}  // namespace eqw
