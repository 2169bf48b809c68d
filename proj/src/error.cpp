#include "fpi/error.hpp"

namespace fpi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::BadSet: return "BadSet";
    case ErrorCode::SampleOutsideSet: return "SampleOutsideSet";
    case ErrorCode::BadOperator: return "BadOperator";
    case ErrorCode::NotAFixedPoint: return "NotAFixedPoint";
    case ErrorCode::EmptySchedule: return "EmptySchedule";
    case ErrorCode::BadSchedule: return "BadSchedule";
    case ErrorCode::InitOutsideDomain: return "InitOutsideDomain";
    case ErrorCode::AnchorOutsideDomain: return "AnchorOutsideDomain";
    case ErrorCode::NoAnchors: return "NoAnchors";
    case ErrorCode::NotFejer: return "NotFejer";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::WrongTraceKind: return "WrongTraceKind";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::WriteError: return "WriteError";
    case ErrorCode::ReadError: return "ReadError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

}  // namespace fpi
