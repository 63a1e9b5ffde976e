#pragma once

#include <stdexcept>
#include <string>

namespace okm {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed instance file; line is 1-based
struct parse_error : error {
  int line;
  parse_error(int line_, const std::string& msg)
      : error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct io_error : error {
  using error::error;
};

// enumeration or oracle budget exhausted
struct cap_exceeded : error {
  using error::error;
};

// instance rejected at load (bad dimensions, weights, non-metric costs, ...)
struct invalid_instance : error {
  using error::error;
};

// a violated internal invariant; indicates a bug, not bad input
struct internal_error : error {
  using error::error;
};

}  // namespace okm
