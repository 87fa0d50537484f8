#pragma once

#include <stdexcept>
#include <string>

namespace optomech {

/// Invalid user-supplied parameters (negative rates, zero coupling, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A covariance matrix violates the uncertainty principle beyond roundoff.
class UnphysicalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Photon branch outside the validity range of the quadratic mirror Hamiltonian.
class BranchDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerical kernel failure: step underflow, step budget, singular system, ...
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lyapunov solve requested for a drift matrix that is not strictly stable.
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace optomech
