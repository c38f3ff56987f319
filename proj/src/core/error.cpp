#include "core/error.hpp"

namespace michell {

const char* to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidArgument: return "invalid argument";
  case ErrorCode::Parse: return "parse error";
  case ErrorCode::Config: return "config error";
  case ErrorCode::Numerical: return "numerical failure";
  case ErrorCode::MissingArtifact: return "missing artifact";
  case ErrorCode::Io: return "i/o error";
  case ErrorCode::Internal: return "internal error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace michell
