#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A discrete-time vector signal: column k holds the sample z_k.
using Signal = Eigen::MatrixXd;

// Error hierarchy. Every failure raised by the library derives from Error so
// the CLI can map it onto an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller broke a documented precondition (dimensions, ranges, missing data).
class ContractViolation : public Error {
public:
    using Error::Error;
};

class OverflowError : public Error {
public:
    using Error::Error;
};

class IllConditionedError : public Error {
public:
    using Error::Error;
};

class NoSolutionError : public Error {
public:
    using Error::Error;
};

class GenerationFailure : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

// Estimator failures: the data cannot produce a gain estimate.
class EstimatorError : public Error {
public:
    using Error::Error;
};

class NotExcitingError : public EstimatorError {
public:
    using EstimatorError::EstimatorError;
};

class InconsistentDataError : public EstimatorError {
public:
    using EstimatorError::EstimatorError;
};

class CertificateConditionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Numerical tolerances shared by the rank and stability tests.
struct Tolerances {
    double rank_rel = 1e-10;       // singular values below rank_rel * sigma_max count as zero
    double unit_circle = 1e-10;    // |lambda| >= 1 - unit_circle is treated as unstable
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// Numerical rank of a matrix via singular values and a relative cutoff.
int numerical_rank(const Matrix& M, double rel_tol = default_tolerances().rank_rel);

double spectral_norm(const Matrix& M);

// Smallest / largest eigenvalue of a symmetric matrix.
double lambda_min(const Matrix& S);
double lambda_max(const Matrix& S);

bool all_finite(const Matrix& M);

// SplitMix64 finaliser; used to derive independent child seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

}  // namespace ssreg
