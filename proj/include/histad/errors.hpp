#pragma once

#include <stdexcept>
#include <string>

namespace histad {

// Exit codes used by the CLI. Each error family gets its own code so
// scripts can tell a bad config from a corrupt file from a numeric blowup.
enum class ExitCode : int {
    ok = 0,
    failure = 1,
    config_error = 2,
    format_error = 3,
    numeric_error = 4,
    contract_error = 5,
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed files: bad magic, truncation, version mismatch.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken preconditions: shape mismatches, invalid argument ranges.
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace histad
