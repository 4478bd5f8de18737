#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace layerprobe::selftest {

/// A built-in known-answer check. `compute` returns the observed value;
/// text checks use `compute_text` and `expected_text` instead.
struct Check {
  std::string name;
  double expected = 0.0;
  double tolerance = 0.0;
  std::function<double()> compute;
  std::string expected_text;
  std::function<std::string()> compute_text;
};

std::vector<Check> builtin_checks();

/// Prints one line per check and a summary. True iff every check passes.
bool run_checks(const std::vector<Check>& checks, std::ostream& out);

}  // namespace layerprobe::selftest
