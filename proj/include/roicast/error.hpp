#pragma once

#include <stdexcept>
#include <string>

namespace roicast {

enum class ErrorKind {
  TruncatedInput,
  Range,
  Parse,
  Validation,
  Io,
  Domain,
  InfeasibleBudget,
  InfeasibleBandwidth,
  Capacity,
  CorruptStream,
  Integrity,
  Anomaly,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TruncatedInput: return "truncated input";
    case ErrorKind::Range: return "range";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Io: return "i/o";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InfeasibleBudget: return "infeasible budget";
    case ErrorKind::InfeasibleBandwidth: return "infeasible bandwidth";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::CorruptStream: return "corrupt stream";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Anomaly: return "anomaly";
  }
  return "unknown";
}

/// Single exception type for the library; `kind()` distinguishes the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool infeasible() const noexcept {
    return kind_ == ErrorKind::InfeasibleBudget || kind_ == ErrorKind::InfeasibleBandwidth;
  }

 private:
  ErrorKind kind_;
};

}  // namespace roicast
