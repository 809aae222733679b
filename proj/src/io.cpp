#include "eqwaves/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eqwaves/error.hpp"
#include "eqwaves/version.hpp"

namespace eqw {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw ConfigurationError("'" + key + "': expected a number, got '" + text + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE)
    throw ConfigurationError("'" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_snapshot(std::ostream& out, const SpectralField& f, double time) {
  nlohmann::json h;
  h["format"] = "eqwaves-snapshot";
  h["format_version"] = kSnapshotFormatVersion;
  h["tool_version"] = kVersion;
  h["beta"] = f.beta();
  h["n_max"] = f.n_max();
  h["k_max"] = f.k_max();
  h["real"] = f.is_real();
  h["time"] = time;
  out << h.dump() << "\n";
  out << "comp,n,k,re,im\n";
  for (int c = 0; c < 3; ++c)
    for (int n = 0; n <= f.n_max(); ++n)
      for (int k = -f.k_max(); k <= f.k_max(); ++k) {
        const cplx v = f.at(c, n, k);
        out << c << ',' << n << ',' << k << ',' << num(v.real()) << ',' << num(v.imag()) << '\n';
      }
}

void write_snapshot(const std::filesystem::path& path, const SpectralField& f, double time) {
  std::ofstream out = open_out(path);
  write_snapshot(out, f, time);
  check_written(out, path);
}

Snapshot read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty snapshot");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad snapshot header: ") + e.what());
  }
  Snapshot s;
  try {
    if (h.at("format").get<std::string>() != "eqwaves-snapshot" ||
        h.at("format_version").get<int>() != kSnapshotFormatVersion)
      throw IoError("not an eqwaves snapshot of a supported version");
    const int n_max = h.at("n_max").get<int>(), k_max = h.at("k_max").get<int>();
    if (n_max < 0 || k_max < 0) throw IoError("negative truncation in snapshot header");
    s.field = SpectralField(h.at("beta").get<double>(), n_max, k_max, h.at("real").get<bool>());
    s.time = h.at("time").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad snapshot header: ") + e.what());
  }
  if (!std::getline(in, line) || trim(line) != "comp,n,k,re,im") throw IoError("missing snapshot column header");
  const std::size_t expect = s.field.data().size();
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    int c, n, k;
    double re, im;
    char tail;
    if (std::sscanf(line.c_str(), "%d,%d,%d,%lf,%lf %c", &c, &n, &k, &re, &im, &tail) != 5)
      throw IoError("malformed snapshot row: " + line);
    if (c < 0 || c > 2 || n < 0 || n > s.field.n_max() || std::abs(k) > s.field.k_max())
      throw IoError("snapshot row outside the header window: " + line);
    s.field.at(c, n, k) = {re, im};
    ++rows;
  }
  if (rows != expect) throw IoError("snapshot has " + std::to_string(rows) + " rows, expected " + std::to_string(expect));
  return s;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_snapshot(in);
}

nlohmann::json config_json(const SolverConfig& cfg) {
  nlohmann::json j;
  j["beta"] = cfg.beta;
  j["nu"] = cfg.nu;
  j["eps"] = cfg.eps;
  j["n_max"] = cfg.n_max;
  j["k_max"] = cfg.k_max;
  j["n_ball"] = cfg.n_ball;
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["integrator"] = std::string(to_string(cfg.integrator));
  j["seed"] = cfg.seed;
  j["quadratic"] = cfg.quadratic;
  j["tol"] = cfg.tol;
  return j;
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr, const Eigenbasis& basis,
                      const SolverConfig& cfg, const nlohmann::json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "snapshots", ec);
  if (ec) throw IoError("cannot create " + (dir / "snapshots").string() + ": " + ec.message());

  nlohmann::json meta;
  meta["tool_version"] = kVersion;
  meta["config"] = config_json(cfg);
  meta["snapshots"] = nlohmann::json::array();
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%05zu.csv", i);
    write_snapshot(dir / "snapshots" / name, basis.to_field(tr.states[i]), tr.times[i]);
    meta["snapshots"].push_back({{"file", std::string("snapshots/") + name}, {"t", tr.times[i]}});
  }
  meta.update(extra);

  const auto dpath = dir / "diagnostics.csv";
  std::ofstream d = open_out(dpath);
  d << "t,l2,hl1_perp,dissipation\n";
  for (const auto& r : tr.diagnostics)
    d << num(r.t) << ',' << num(r.l2) << ',' << num(r.hl1_perp) << ',' << num(r.dissipation) << '\n';
  check_written(d, dpath);

  const auto mpath = dir / "meta.json";
  std::ofstream m = open_out(mpath);
  m << meta.dump(2) << "\n";
  check_written(m, mpath);
}

RunConfig RunConfig::parse(std::istream& in, const std::set<std::string>& allowed) {
  RunConfig rc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigurationError("line " + std::to_string(lineno) + ": empty key");
    if (!allowed.count(key)) throw ConfigurationError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (rc.values_.count(key)) throw ConfigurationError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    rc.values_[key] = value;
  }
  return rc;
}

RunConfig RunConfig::load(const std::filesystem::path& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in, allowed);
}

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_double(key, it->second);
}

long RunConfig::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_long(key, it->second);
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = trim(it->second);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigurationError("'" + key + "': expected true or false, got '" + v + "'");
}

std::vector<double> RunConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigurationError("'" + key + "': empty list");
  return out;
}

const std::set<std::string>& solver_keys() {
  static const std::set<std::string> keys{"beta", "nu", "eps", "n_max", "k_max", "n_ball", "dt",
                                          "t_final", "integrator", "seed", "quadratic", "tol"};
  return keys;
}

void apply_solver_keys(const RunConfig& rc, SolverConfig& cfg) {
  cfg.beta = rc.get_double("beta", cfg.beta);
  cfg.nu = rc.get_double("nu", cfg.nu);
  cfg.eps = rc.get_double("eps", cfg.eps);
  cfg.n_max = static_cast<int>(rc.get_int("n_max", cfg.n_max));
  cfg.k_max = static_cast<int>(rc.get_int("k_max", cfg.k_max));
  cfg.n_ball = static_cast<int>(rc.get_int("n_ball", cfg.n_ball));
  cfg.dt = rc.get_double("dt", cfg.dt);
  cfg.t_final = rc.get_double("t_final", cfg.t_final);
  if (rc.has("integrator")) cfg.integrator = parse_integrator(trim(rc.get("integrator", "")));
  const long seed = rc.get_int("seed", static_cast<long>(cfg.seed));
  if (seed < 0) throw ConfigurationError("'seed' must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.quadratic = rc.get_bool("quadratic", cfg.quadratic);
  cfg.tol = rc.get_double("tol", cfg.tol);
}

}  // namespace eqw
