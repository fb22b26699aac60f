#ifndef DK_ERRORS_HPP
#define DK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dk {

// Bad argument values at a call site (dimension mismatch, NaN input, ...).
struct argument_error : std::invalid_argument {
  explicit argument_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid configuration (knot counts, fractions, schema violations, ...).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure (covariance not PD, training divergence, ...).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or incompatible files (model containers, CSV, configs).
struct format_error : std::runtime_error {
  explicit format_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dk

#endif
