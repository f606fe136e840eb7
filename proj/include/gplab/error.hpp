#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

// Config and argument problems map to exit code 2, numerical failures to 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameter : ConfigError {
  using ConfigError::ConfigError;
};

struct GeometryMismatch : ConfigError {
  using ConfigError::ConfigError;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct DegeneracyError : NumericalError {
  using NumericalError::NumericalError;
};

struct HypothesisViolated : NumericalError {
  using NumericalError::NumericalError;
};

struct BoundaryContamination : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace gplab
