#pragma once

#include <stdexcept>
#include <string>

namespace smfr {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad inputs: shapes, flags, malformed configuration. CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: rank collapse, infeasible selection. CLI exit code 3.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem or parse problem. CLI exit code 4.
class IoError : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class ConstantColumn : public ValidationError {
public:
    explicit ConstantColumn(long column)
        : ValidationError("column " + std::to_string(column) +
                          " has zero variance; constant predictors cannot be normalized"),
          column_(column) {}
    long column() const { return column_; }

private:
    long column_;
};

class InvalidConfig : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class InvalidFolds : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class UndefinedMetric : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoValidFactorCount : public NumericError {
public:
    using NumericError::NumericError;
};

class RankCollapse : public NumericError {
public:
    explicit RankCollapse(long k)
        : NumericError("fitted matrices have rank below the requested " + std::to_string(k) +
                       " components; try a smaller k or weaker penalties"),
          k_(k) {}
    long k() const { return k_; }

private:
    long k_;
};

class RankDeficientBaseline : public NumericError {
public:
    using NumericError::NumericError;
};

class SingularSystem : public NumericError {
public:
    using NumericError::NumericError;
};

class DependentComponents : public NumericError {
public:
    using NumericError::NumericError;
};

}  // namespace smfr
