#pragma once

#include <stdexcept>
#include <string>

namespace sabfl {

// Bad run configuration or violated operation precondition.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameter/data shapes disagree.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated input files.
class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sabfl
