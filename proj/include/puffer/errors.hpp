#pragma once

#include <stdexcept>
#include <string>

namespace puffer {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with the input data or request (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Numerical failures: singular systems, degenerate inputs (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public DataError {
public:
    using DataError::DataError;
};

class NonFiniteInput : public DataError {
public:
    using DataError::DataError;
};

class InvalidSpec : public DataError {
public:
    using DataError::DataError;
};

class EmptySupport : public DataError {
public:
    using DataError::DataError;
};

class MissingColumn : public DataError {
public:
    using DataError::DataError;
};

class ZeroVarianceColumn : public DataError {
public:
    using DataError::DataError;
};

/// CSV/JSON parse failure; message carries file, row and column of the offending cell.
class ParseError : public DataError {
public:
    using DataError::DataError;
    ParseError(const std::string& file, long row, long col, const std::string& what)
        : DataError(file + ":" + std::to_string(row) + ":" + std::to_string(col) + ": " + what),
          row_(row),
          col_(col) {}

    long row() const { return row_; }
    long col() const { return col_; }

private:
    long row_ = 0;
    long col_ = 0;
};

class AllZeroMatrix : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularGram : public NumericError {
public:
    using NumericError::NumericError;
};

class NoSuchModel : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace puffer
