#pragma once

#include <stdexcept>
#include <string>

namespace geotri {

// Base of every error raised by the library. The CLI maps IoError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input text did not follow the expected file format.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value violated a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Covariance is not symmetric positive-definite.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class EmptyGazetteer : public Error {
 public:
  using Error::Error;
};

// Fusion was asked to use a relation label that has no trained model.
class MissingModel : public Error {
 public:
  explicit MissingModel(const std::string& label);

  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

}  // namespace geotri
