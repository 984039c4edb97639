#pragma once

#include <stdexcept>
#include <string>

namespace lobsim {

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Asking for a price-derived quantity (mid, spread) while a side is empty.
class UndefinedPriceError : public Error {
public:
    explicit UndefinedPriceError(const std::string& what) : Error(what) {}
};

// A structural invariant of the book was violated (bid >= ask, negative
// volume, ...). Indicates a bug, not bad user input.
class InvariantViolation : public Error {
public:
    explicit InvariantViolation(const std::string& what) : Error(what) {}
};

// Bad run parameters (mechanism config, CLI values, fit ranges, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Numerical routine got input it cannot work with (nonpositive values on a
// log scale, too few points, degenerate abscissae, ...).
class FitError : public Error {
public:
    explicit FitError(const std::string& what) : Error(what) {}
};

} // namespace lobsim
