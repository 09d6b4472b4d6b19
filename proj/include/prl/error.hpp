#pragma once

#include <stdexcept>
#include <string>

namespace prl {

// Bad input: malformed files, invalid configuration, contract violations by
// the caller. The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace prl
