#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace crnr {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Bad caller input: shapes, ranges, empty sets.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical precondition failed on otherwise well-formed input
/// (rank-deficient B, zero matrix, empty numerical range).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative routine stopped at its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON document; the message names the offending field.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InvalidArgument(msg);
}

} // namespace crnr
