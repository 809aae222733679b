#pragma once

#include <functional>
#include <string>
#include <vector>

namespace eqw {

struct SuiteResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct Suite {
  std::string name;
  // Returns the detail line; sets `ok`.
  std::function<std::string(bool& ok)> run;
};

// Invariant suites of every module at small truncations.
std::vector<Suite> selftest_suites();
SuiteResult run_suite(const Suite& s);

}  // namespace eqw
