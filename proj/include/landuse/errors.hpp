#pragma once

#include <stdexcept>
#include <string>

namespace landuse {

// Bad user-supplied configuration (CLI exit code 3).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or malformed input data (CLI exit code 2).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal cross-artifact consistency violation (CLI exit code 4).
struct ConsistencyError : std::runtime_error {
    explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace landuse
