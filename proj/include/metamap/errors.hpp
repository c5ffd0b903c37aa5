#ifndef METAMAP_ERRORS_HPP
#define METAMAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace metamap {

enum class ErrorKind {
  parameter,          // invalid model/config parameter
  domain,             // argument outside the operation's domain
  range,              // target value outside a branch image
  ambiguity,          // partition point without a side flag
  numerical,          // root finding failed to converge
  convergence,        // iterative solver exceeded its budget
  truncation,         // reported truncation bound exceeds its budget
  unresolved_region,  // point falls in the unresolved neighbourhood of 3/8
  grid,               // incompatible grids
  diagnostic,         // cross-validation between independent estimates failed
  config,             // bad CLI / config-file input
  io,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::ambiguity: return "ambiguity";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::unresolved_region: return "unresolved_region";
    case ErrorKind::grid: return "grid";
    case ErrorKind::diagnostic: return "diagnostic";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace metamap

#endif
