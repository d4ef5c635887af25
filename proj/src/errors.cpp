#include "vmda/errors.hpp"

#include <atomic>
#include <iostream>

namespace vmda {

namespace {
std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_silenced{false};
}  // namespace

void warn(const std::string& message) {
  ++g_warnings;
  if (!g_silenced) std::cerr << "vmda warning: " << message << '\n';
}

std::size_t warning_count() { return g_warnings; }

void set_warnings_silenced(bool silenced) { g_silenced = silenced; }

bool warnings_silenced() { return g_silenced; }

}  // namespace vmda
