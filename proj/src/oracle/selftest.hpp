#pragma once

// Named invariant and oracle checks shared by `vmda selftest` and the tests.

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vmda::selftest {

struct Check {
  std::string name;
  bool oracle;  // compares against an independent reference
  std::function<void()> body;  // throws on failure
};

struct Outcome {
  std::string name;
  bool oracle = false;
  bool passed = false;
  std::string detail;
};

const std::vector<Check>& registry();
std::size_t oracle_count();

// Runs every check. With a config path, validating that config is an extra
// check named "config".
std::vector<Outcome> run_all(const std::optional<std::filesystem::path>& config = std::nullopt);

}  // namespace vmda::selftest
