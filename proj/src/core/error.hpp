#pragma once

#include <stdexcept>
#include <string>

namespace michell {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Config,
  Numerical,
  MissingArtifact,
  Io,
  Internal,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception; the C API maps
// the code onto its status enum.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

} // namespace michell
