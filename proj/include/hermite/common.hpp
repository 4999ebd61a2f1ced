#ifndef HERMITE_COMMON_HPP
#define HERMITE_COMMON_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hermite {

/// Non-finite value produced or consumed by a numeric operation.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed binary/text input (IDX files, checkpoints).
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& msg, std::size_t byte_offset)
        : std::runtime_error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset(byte_offset) {}
    std::size_t offset;
};

/// Bad run configuration (unknown key, missing path, unparsable value).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hermite

#endif
