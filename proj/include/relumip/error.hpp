#pragma once

#include <stdexcept>
#include <string>

namespace relumip {

/// Raised for malformed inputs and violated preconditions across the library.
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input document could not be parsed or fails schema validation.
class ParseError : public Error
{
public:
    using Error::Error;
};

/// Request exceeds a hard budget (e.g. too many patterns to enumerate).
class Refused : public Error
{
public:
    using Error::Error;
};

}  // namespace relumip
