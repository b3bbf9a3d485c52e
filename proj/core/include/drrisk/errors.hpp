#pragma once

#include <stdexcept>
#include <string>

namespace drrisk {

// Base for every error raised by the library. Subclasses separate bad input
// (InvalidArgument, DimensionMismatch) from domain failures of a computation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Raised when a computation is well-posed but has no finite/feasible answer.
class DomainError : public Error {
public:
    using Error::Error;
};

// Sigma_hat^{-1} is not dominated by Sigma^{-1}: the Gaussian RVD is infinite.
class DominanceViolation : public DomainError {
public:
    using DomainError::DomainError;
};

// f_P > 0 somewhere f_Phat = 0 (absolute continuity fails).
class SupportViolation : public DomainError {
public:
    using DomainError::DomainError;
};

class Unsupported : public DomainError {
public:
    using DomainError::DomainError;
};

class InfeasibleDominance : public DomainError {
public:
    using DomainError::DomainError;
};

class Infeasible : public DomainError {
public:
    using DomainError::DomainError;
};

}  // namespace drrisk
