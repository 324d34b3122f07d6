// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ntc {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller broke an operation's precondition (shape mismatch, bad argument).
struct ContractViolation : Error {
    using Error::Error;
};

// Invalid user-facing configuration (unknown key, bad value, unknown kind).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed external file (image, checkpoint); message names the location.
struct ParseError : Error {
    using Error::Error;
};

// Numerical failure during iteration (non-finite loss).
struct NumericError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractViolation(what);
}

} // namespace ntc
