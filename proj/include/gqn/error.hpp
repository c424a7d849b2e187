#pragma once

#include <stdexcept>
#include <string>

namespace gqn {

// A caller broke a documented precondition (masked action, out-of-bounds
// control, stale cache). These are programming errors, not runtime conditions.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent configuration / checkpoint content.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gqn
