#pragma once

#include <stdexcept>
#include <string>

namespace djinn {

/// Raised for invalid arguments, malformed input files and training failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace djinn
