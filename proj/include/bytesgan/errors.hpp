#pragma once

#include <stdexcept>
#include <string>

namespace bytesgan {

/// Base of every error raised by the library. `exit_code()` is the stable
/// CLI contract: 2 configuration, 3 I/O or format, 4 numerical divergence.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

/// A split request that a class cannot satisfy.
class CapacityError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IoError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class FormatError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class DivergenceError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

/// Violated precondition or shape contract inside the library.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw ContractError(what);
}

} // namespace bytesgan
