#pragma once

#include <stdexcept>
#include <string>

namespace vopt {

enum class ErrorKind {
  Capability,
  Infeasible,
  Unbounded,
  NotNested,
  ZeroNormal,
  NotSpd,
  NoNormalsYet,
  DegenerateCut,
  MaxIter,
  UnboundedInit,
  NoVertices,
  TooFewPoints,
  InvalidArgument,
  Io,
  Config,
};

const char* to_string(ErrorKind k);

/// Library-wide error type. The kind distinguishes contract violations
/// (Capability, InvalidArgument) from solver outcomes (Infeasible, Unbounded,
/// MaxIter) and structural failures (NotNested, NotSpd, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace vopt
