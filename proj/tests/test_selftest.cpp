#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "oracle/selftest.hpp"

namespace fs = std::filesystem;

TEST_CASE("self-test suite passes and covers every derived example") {
  const auto outcomes = vmda::selftest::run_all();
  for (const auto& o : outcomes) {
    INFO(o.name << ": " << o.detail);
    CHECK(o.passed);
  }
  CHECK(vmda::selftest::oracle_count() >= 25);
  std::set<std::string> names;
  for (const auto& o : outcomes) names.insert(o.name);
  CHECK(names.size() == outcomes.size());
}

TEST_CASE("self-test reports a bad config") {
  const auto path = fs::temp_directory_path() / "vmda_bad_ratio.ini";
  std::ofstream(path) << "[memory]\nfilter_ratio = 7\n";
  const auto outcomes = vmda::selftest::run_all(path);
  REQUIRE(outcomes.front().name == "config");
  CHECK_FALSE(outcomes.front().passed);
  CHECK(outcomes.front().detail.find("ratio") != std::string::npos);
  fs::remove(path);
}
