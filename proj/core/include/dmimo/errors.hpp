#pragma once

#include <stdexcept>
#include <string>

namespace dmimo {

// Bad or inconsistent configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature/linear-algebra failures and non-finite intermediate values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The outage constraint cannot be met even by the most conservative layout.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmimo
