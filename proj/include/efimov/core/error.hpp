#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace efimov {

enum class ErrorCode {
  PointOutsideChart,
  NonInvertibleMetric,
  DegeneratePlane,
  DegenerateImmersion,
  DegenerateShapeOperator,
  InvalidPinching,
  NonHyperbolicPoint,
  ModeUnsupported,
  EndpointSample,
  LeftPatch,
  OpenBoundary,
  BoundViolated,
  NoCrossing,
  ParameterOutOfRange,
  WrongSignDeterminant,
  InvalidArgument,
  ParseError,
  EvaluationError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::PointOutsideChart: return "PointOutsideChart";
    case ErrorCode::NonInvertibleMetric: return "NonInvertibleMetric";
    case ErrorCode::DegeneratePlane: return "DegeneratePlane";
    case ErrorCode::DegenerateImmersion: return "DegenerateImmersion";
    case ErrorCode::DegenerateShapeOperator: return "DegenerateShapeOperator";
    case ErrorCode::InvalidPinching: return "InvalidPinching";
    case ErrorCode::NonHyperbolicPoint: return "NonHyperbolicPoint";
    case ErrorCode::ModeUnsupported: return "ModeUnsupported";
    case ErrorCode::EndpointSample: return "EndpointSample";
    case ErrorCode::LeftPatch: return "LeftPatch";
    case ErrorCode::OpenBoundary: return "OpenBoundary";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::WrongSignDeterminant: return "WrongSignDeterminant";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EvaluationError: return "EvaluationError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Formats arguments with a stream and throws.
template <class... A>
[[noreturn]] void fail(ErrorCode code, const A&... parts) {
  std::ostringstream os;
  os.precision(17);
  (os << ... << parts);
  throw Error(code, os.str());
}

}  // namespace efimov
