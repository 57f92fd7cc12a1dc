#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbdforge {

// Base for every error raised by the library. Data problems (bad files,
// unknown symbols, violated preconditions) all derive from this so callers
// can map them to a single exit status.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A record in an input document could not be parsed. `location` is a
// 1-based line number for line-oriented formats and an entry index for
// JSON documents.
class ParseError : public Error {
public:
    ParseError(std::size_t location, const std::string& what)
        : Error(what), location_(location) {}

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

class UnknownSymbolError : public Error {
public:
    explicit UnknownSymbolError(std::string symbol)
        : Error("unknown symbol '" + symbol + "'"), symbol_(std::move(symbol)) {}

    const std::string& symbol() const noexcept { return symbol_; }

private:
    std::string symbol_;
};

// A call violated a documented precondition (bad sizes, empty inputs, etc).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace fbdforge
