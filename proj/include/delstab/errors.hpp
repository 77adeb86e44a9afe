#pragma once

#include <stdexcept>
#include <string>

namespace delstab {

// Input that the analysis deliberately refuses: marginal baselines, vanishing
// discriminants, coincident critical delays. Callers map this to exit code 3.
struct NonGenericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed configuration or CLI input. Maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An internal cross-check (analytic report vs. spectral count) disagreed.
// Maps to exit code 4.
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace delstab
