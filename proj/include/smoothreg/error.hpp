#pragma once

#include <stdexcept>
#include <string>

namespace smoothreg {

/// Raised for any violated precondition or unrecoverable numerical failure.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smoothreg
