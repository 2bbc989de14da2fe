#ifndef PHENOMAP_ERROR_HPP
#define PHENOMAP_ERROR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace phenomap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad parameter or precondition violation by the caller (CLI exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class InputError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown such as a non-finite loss (CLI exit code 3).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Non-fatal diagnostics collected by operations that accept an optional sink.
using Warnings = std::vector<std::string>;

}  // namespace phenomap

#endif
