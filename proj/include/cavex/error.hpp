#pragma once

#include <stdexcept>

namespace cavex {

// Invalid or inconsistent configuration, from files or from code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cavex
