#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dacp {

enum class ErrorKind {
  malformed_record,
  schema_violation,
  encoding_error,
  empty_document,
  invalid_pattern,
  pool_exhausted_self_collision,
  component_underflow,
  empty_component,
  manifest_mismatch,
  missing_slot,
  unknown_slot_value,
  service_error,
  parse_error,
  no_judged_pairs,
  config_invalid,
  stage_failure,
  io_error,
  provenance_mismatch,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::malformed_record: return "malformed-record";
    case ErrorKind::schema_violation: return "schema-violation";
    case ErrorKind::encoding_error: return "encoding-error";
    case ErrorKind::empty_document: return "empty-document";
    case ErrorKind::invalid_pattern: return "invalid-pattern";
    case ErrorKind::pool_exhausted_self_collision: return "pool-exhausted-self-collision";
    case ErrorKind::component_underflow: return "component-underflow";
    case ErrorKind::empty_component: return "empty-component";
    case ErrorKind::manifest_mismatch: return "manifest-mismatch";
    case ErrorKind::missing_slot: return "missing-slot";
    case ErrorKind::unknown_slot_value: return "unknown-slot-value";
    case ErrorKind::service_error: return "service-error";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::no_judged_pairs: return "no-judged-pairs";
    case ErrorKind::config_invalid: return "config-invalid";
    case ErrorKind::stage_failure: return "stage-failure";
    case ErrorKind::io_error: return "io-error";
    case ErrorKind::provenance_mismatch: return "provenance-mismatch";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI's exit-code mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dacp
