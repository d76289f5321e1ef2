#pragma once

#include <stdexcept>
#include <string>

namespace demogen {

// File/IO and format problems (bad path, truncated file, version mismatch).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data violating a documented invariant (bad episode, bad task definition).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Reset could not find a collision-free placement within the resample budget.
struct ResetError : std::runtime_error {
    explicit ResetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scripted expert failed to finish within the horizon.
struct ExpertError : std::runtime_error {
    explicit ExpertError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace demogen
