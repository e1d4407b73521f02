#pragma once

#include <stdexcept>
#include <string>

namespace cmlevy {

//! Base class of all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Model or function parameters outside their admissible range.
class ParameterError : public Error {
  public:
    using Error::Error;
};

//! Malformed call arguments (grid sizes, ranges, horizons).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

//! Query point outside the domain of a function.
class DomainError : public Error {
  public:
    using Error::Error;
};

//! Operation not available for this model or function kind.
class CapabilityError : public Error {
  public:
    using Error::Error;
};

//! Hypotheses of a criterion are not met by the inputs.
class PreconditionError : public Error {
  public:
    using Error::Error;
};

//! Quadrature or root finding did not reach the requested accuracy.
class NumericError : public Error {
  public:
    NumericError(const std::string& what, double achieved)
        : Error(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

  private:
    double achieved_;
};

#define CMLEVY_REQUIRE(cond, ErrType, msg)                                     \
    do {                                                                       \
        if (!(cond))                                                           \
            throw ::cmlevy::ErrType(msg);                                      \
    } while (false)

} // namespace cmlevy
