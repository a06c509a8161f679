// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_ERRORS_HPP
#define RETRO_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace retro {

// Base class for every error raised by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string &what): std::runtime_error(what) {}
};

// Text-parsing error carrying a 1-based character position.
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class UnbalancedParenthesis : public ParseError {
public:
  using ParseError::ParseError;
};

class UnclosedRingBond : public ParseError {
public:
  using ParseError::ParseError;
};

class UnknownElement : public ParseError {
public:
  using ParseError::ParseError;
};

class ValenceViolation : public ParseError {
public:
  using ParseError::ParseError;
};

class UnsupportedPredicate : public ParseError {
public:
  using ParseError::ParseError;
};

class UnmappedProductAtom : public Error {
public:
  using Error::Error;
};

class RewriteValenceError : public Error {
public:
  using Error::Error;
};

class LengthMismatch : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

class MissingRouteBlock : public Error {
public:
  using Error::Error;
};

class EmptyRoute : public Error {
public:
  using Error::Error;
};

class StepSchemaError : public Error {
public:
  StepSchemaError(std::size_t step, const std::string &field)
      : Error("route step " + std::to_string(step) + " is missing field '" +
              field + "'"),
        step_(step), field_(field) {}

  std::size_t step() const { return step_; }
  const std::string &field() const { return field_; }

private:
  std::size_t step_;
  std::string field_;
};

class MissingMoleculeBlock : public Error {
public:
  using Error::Error;
};

class EndpointError : public Error {
public:
  using Error::Error;
};

class TimeoutError : public Error {
public:
  using Error::Error;
};

class ScriptExhausted : public Error {
public:
  using Error::Error;
};

class EmptyDatabase : public Error {
public:
  using Error::Error;
};

class DependencyError : public Error {
public:
  using Error::Error;
};

}  // namespace retro

#endif  // RETRO_ERRORS_HPP
