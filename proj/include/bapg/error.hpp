#ifndef BAPG_ERROR_HPP
#define BAPG_ERROR_HPP

#include <stdexcept>
#include <string>

namespace bapg {

// Invalid values in otherwise well-formed input: bad numeric ranges,
// broken invariants, degenerate inputs. CLI maps this to exit status 4.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed configuration or invocation: unknown keys, duplicate keys,
// type mismatches, unknown subcommands. CLI maps this to exit status 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A required upstream artifact is absent on disk. CLI exit status 3.
class MissingArtifactError : public std::runtime_error {
public:
    explicit MissingArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

// I/O failure while reading or writing artifacts. CLI exit status 1.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace bapg

#endif
