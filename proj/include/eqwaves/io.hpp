#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqwaves/eigenbasis.hpp"
#include "eqwaves/fields.hpp"
#include "eqwaves/solver.hpp"

namespace eqw {

// Snapshot file: one JSON header line, then CSV rows comp,n,k,re,im in storage order.
struct Snapshot {
  SpectralField field;
  double time = 0.0;
};

void write_snapshot(std::ostream& out, const SpectralField& f, double time);
void write_snapshot(const std::filesystem::path& path, const SpectralField& f, double time);
// Throws IoError on malformed or unreadable input.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

nlohmann::json config_json(const SolverConfig& cfg);

// Writes meta.json, diagnostics.csv and snapshots/NNNNN.csv under `dir`.
// `extra` is merged into the metadata.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr, const Eigenbasis& basis,
                      const SolverConfig& cfg, const nlohmann::json& extra = nlohmann::json::object());

// `key = value` lines with `#` comments. Keys outside `allowed` are rejected.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(std::istream& in, const std::set<std::string>& allowed);
  static RunConfig load(const std::filesystem::path& path, const std::set<std::string>& allowed);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

// Keys understood by apply_solver_keys.
const std::set<std::string>& solver_keys();
// Overwrites the SolverConfig fields present in `rc`. Throws ConfigurationError on bad values.
void apply_solver_keys(const RunConfig& rc, SolverConfig& cfg);

}  // namespace eqw
