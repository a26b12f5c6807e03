#pragma once

#include <stdexcept>
#include <string>

namespace fade {

// Invalid or inconsistent run configuration (CLI exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value detected during a run (CLI exit code 3).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or missing dataset input (CLI exit code 4).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace fade
