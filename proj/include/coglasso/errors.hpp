#ifndef COGLASSO_ERRORS_HPP
#define COGLASSO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace coglasso {

// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument or configuration value (CLI exit code 1).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// Malformed or degenerate input data (CLI exit code 2).
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical degeneracy or divergence during computation (CLI exit code 3).
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& msg) : Error(msg) {}
};

}  // namespace coglasso

#endif
