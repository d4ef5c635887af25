#pragma once

#include <stdexcept>
#include <string>

namespace vmda {

// Bad shapes, out-of-range values, malformed inputs.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation called in the wrong lifecycle state (e.g. double init).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A runtime invariant of the tracking pipeline was violated.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Warnings are counted and forwarded to stderr unless silenced.
void warn(const std::string& message);
std::size_t warning_count();
void set_warnings_silenced(bool silenced);
bool warnings_silenced();

}  // namespace vmda
