// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgs {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
    ok = 0,
    usage = 2,
    data = 3,
    numerical = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents; `offset` is the byte position where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Config / command-line problems. `line` is 0 when not tied to a file line.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), detail_(what), line_(line) {}
    int line() const noexcept { return line_; }
    /// The message without the line prefix.
    const std::string& detail() const noexcept { return detail_; }
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }

private:
    std::string detail_;
    int line_;
};

class CoverageInfeasible : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::numerical; }
};

}  // namespace wgs
