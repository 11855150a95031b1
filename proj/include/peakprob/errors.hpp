#pragma once

#include <stdexcept>
#include <string>

namespace peakprob {

// Base class for all library errors. Subclasses map to CLI exit codes:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration: unknown registry id, invalid window, malformed schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Bad or insufficient input data: parse failures, duplicate keys,
// empty intersections, missing history.
class DataError : public Error {
public:
    using Error::Error;
};

// Numerical failure: non-convergent fits, singular matrices,
// Cholesky breakdown.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace peakprob
