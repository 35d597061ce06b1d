#pragma once

#include <stdexcept>
#include <string>

namespace qdiff {

/// Invalid arguments or inputs that violate a documented precondition.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The dense reference solver refuses systems above its qubit cap.
class DimensionLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The weighted ensemble can no longer produce a ratio estimate
/// (weight sum vanished or every trajectory was excluded).
class NumericalCollapse : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration; the message carries a JSON path prefix.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace qdiff
