#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fpi {

enum class ErrorCode {
  DimMismatch,
  NonFinite,
  EmptyTrace,
  BadWindow,
  BadSet,
  SampleOutsideSet,
  BadOperator,
  NotAFixedPoint,
  EmptySchedule,
  BadSchedule,
  InitOutsideDomain,
  AnchorOutsideDomain,
  NoAnchors,
  NotFejer,
  BoundViolated,
  WrongTraceKind,
  ConfigMismatch,
  ParseError,
  ValidationError,
  WriteError,
  ReadError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a stable error code. what() is "<Code>: <detail>".
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fpi
