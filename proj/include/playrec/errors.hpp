#pragma once

#include <stdexcept>
#include <string>

namespace playrec {

// Error taxonomy shared across the library. The CLI maps each class to a
// distinct exit code (see tools/main.cpp).

// Bad configuration or arguments (exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable, malformed, or version-incompatible files (exit code 3).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated domain contracts: out-of-vocab tracks, k out of range,
// stale index, shape mismatches (exit code 4).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace playrec
