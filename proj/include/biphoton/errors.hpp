#pragma once

#include <stdexcept>
#include <string>

namespace biphoton {

// Domain errors map to CLI exit code 2, NumericalFailure to exit code 3.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidConfig : DomainError {
    using DomainError::DomainError;
};

// No probe frequency satisfies t1^2(w) = t2^2(w) with real w.
struct EmptyCandidates : DomainError {
    using DomainError::DomainError;
};

struct ZeroPhotons : DomainError {
    using DomainError::DomainError;
};

struct ZeroProbabilityOutcome : DomainError {
    using DomainError::DomainError;
};

// All closed-form amplitudes vanish for the requested event counts.
struct DegenerateState : DomainError {
    using DomainError::DomainError;
};

struct NotNormalized : DomainError {
    using DomainError::DomainError;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace biphoton
