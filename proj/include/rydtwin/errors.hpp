#pragma once
#include <stdexcept>
#include <string>

namespace rydtwin {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

struct SearchError : std::runtime_error {
    explicit SearchError(const std::string& m) : std::runtime_error(m) {}
};

struct MemoryGuardError : std::runtime_error {
    explicit MemoryGuardError(const std::string& m) : std::runtime_error(m) {}
};

struct InstabilityError : std::runtime_error {
    explicit InstabilityError(const std::string& m) : std::runtime_error(m) {}
};

struct UnsupportedOrderError : std::runtime_error {
    explicit UnsupportedOrderError(const std::string& m) : std::runtime_error(m) {}
};

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace rydtwin
