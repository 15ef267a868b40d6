#ifndef ORDMTL_CORE_ERRORS_HPP
#define ORDMTL_CORE_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ordmtl {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument values (out-of-range ranks, bad shapes, non-finite scores).
struct ValidationError : Error {
  using Error::Error;
};

// Invalid or inconsistent configuration (bad proportions, unknown keys, ...).
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem-level failures (cannot open/read/write).
struct IoError : Error {
  using Error::Error;
};

// Malformed file content; carries the byte offset where parsing stopped.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

// Numeric failures during computation (NaN loss, non-finite activations).
struct NumericError : Error {
  using Error::Error;
};

// Metric preconditions not met (e.g. ROC without both classes).
struct MetricError : Error {
  using Error::Error;
};

}  // namespace ordmtl

#endif
