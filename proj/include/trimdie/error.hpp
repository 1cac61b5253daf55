#pragma once

#include <stdexcept>
#include <string>

namespace trimdie {

// Error taxonomy used across the library. Callers that only care about
// "something went wrong" can catch trimdie::Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct LookupError : Error {
  using Error::Error;
};

struct GeometryError : Error {
  using Error::Error;
};

struct RenderError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DecodeError : Error {
  using Error::Error;
};

struct CalibrationError : Error {
  using Error::Error;
};

// A spot with missing target points; the pipeline turns this into a
// point_miss status instead of aborting.
struct MeasurementIncomplete : Error {
  using Error::Error;
};

struct ReportError : Error {
  using Error::Error;
};

}  // namespace trimdie
