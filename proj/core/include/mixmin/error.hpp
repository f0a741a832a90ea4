#pragma once

#include <stdexcept>
#include <string>

namespace mixmin {

// Base class for all errors thrown by the library. The CLI maps these to
// exit code 2 (data error), as opposed to exit code 1 (usage error).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixmin
