#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace latefusion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data: a bad line in a label/detection/feature file.
class ParseError : public Error
{
public:
    ParseError(std::string source, std::size_t line, const std::string &what);

    const std::string &source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// Invalid configuration or inconsistent inputs (missing frames, bad flags).
class InputError : public Error
{
public:
    using Error::Error;
};

/// Failure reading or writing a file.
class IoError : public Error
{
public:
    using Error::Error;
};

/// Numeric breakdown during training (NaN / inf loss).
class NumericError : public Error
{
public:
    using Error::Error;
};

} // namespace latefusion
