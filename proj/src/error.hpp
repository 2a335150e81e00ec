#pragma once

#include <stdexcept>
#include <string>

namespace lkpz {

enum class ErrorCode {
  InvalidArgument = 1,
  BadConfig,
  Resolution,
  OutOfRange,
  BlowUp,
  StepControlFailure,
  NoConvergence,
  HorizonTooLarge,
  Io,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lkpz
