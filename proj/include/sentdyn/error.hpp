#pragma once

#include <stdexcept>
#include <string>

namespace sentdyn {

// Bad configuration or arguments (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sentdyn
