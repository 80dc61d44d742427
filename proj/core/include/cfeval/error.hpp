#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cfeval {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (invalid SIR
/// parameters, non-finite metric inputs, too-small samples).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Integration or basis evaluation produced a non-finite value.
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Inputs that should share a shape do not.
class StructuralError : public Error {
  public:
    using Error::Error;
};

class InsufficientDataError : public Error {
  public:
    using Error::Error;
};

/// The regression design matrix is rank deficient.
class SingularFitError : public Error {
  public:
    SingularFitError(const std::string &what, std::vector<std::string> columns)
        : Error{what}, columns_{std::move(columns)} {}

    /// Names of the design columns found to be linearly dependent.
    const std::vector<std::string> &columns() const noexcept { return columns_; }

  private:
    std::vector<std::string> columns_;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public Error {
  public:
    ConfigError(const std::string &what, int line = 0, std::string field = {})
        : Error{what}, line_{line}, field_{std::move(field)} {}

    int line() const noexcept { return line_; }
    const std::string &field() const noexcept { return field_; }

  private:
    int line_;
    std::string field_;
};

} // namespace cfeval
