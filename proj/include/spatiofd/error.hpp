#pragma once

#include <stdexcept>
#include <string>

namespace spatiofd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: wrong shapes, out-of-range parameters, malformed files.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Input was well formed but the numerics could not proceed.
class NumericError : public Error {
public:
    using Error::Error;
};

class ZeroVarianceError : public NumericError {
public:
    explicit ZeroVarianceError(const std::string& what)
        : NumericError("zero-variance: " + what) {}
};

} // namespace spatiofd
