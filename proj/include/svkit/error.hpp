#pragma once

#include <stdexcept>
#include <string>

namespace svkit {

enum class ErrorCode {
  InvalidArgument = 1,
  OutOfDomain = 2,
  IndexOutOfRange = 3,
  NotSymmetric = 4,
  Singular = 5,
  Unsupported = 6,
  Parse = 7,
  Io = 8,
  Precondition = 9,
  Numerical = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svkit
