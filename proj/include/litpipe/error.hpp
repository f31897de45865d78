#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace litpipe {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input file could not be opened, read, or written.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(what + ": " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// A record in a line-oriented file failed validation. line() is 1-based.
class LineError : public Error {
public:
    LineError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Caller violated a documented precondition (bad count, empty input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace litpipe
