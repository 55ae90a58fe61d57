#pragma once

#include <stdexcept>
#include <string>

namespace rgflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A problem hypothesis (H1)-(H3) or the coupling normalization is violated.
/// `label()` names the violated hypothesis, e.g. "H2" or "lambda range".
class InvalidHypothesis : public Error {
 public:
  InvalidHypothesis(std::string label, const std::string& what)
      : Error("invalid hypothesis (" + label + "): " + what), label_(std::move(label)) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

/// |u| left the working analyticity region of the nonlinearity.
class RadiusExceeded : public Error {
 public:
  using Error::Error;
};

/// Picard iteration did not reach tolerance within the iteration budget.
class NoContraction : public Error {
 public:
  using Error::Error;
};

/// ||f_n|| >= eps_n while strict admissibility is on.
class InadmissibleData : public Error {
 public:
  using Error::Error;
};

class DegenerateSeries : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class InvalidDelta : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Config validation failure; `field()` is the JSON path of the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error("validation error at '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace rgflow
