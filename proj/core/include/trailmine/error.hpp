#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trailmine {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An event that violates the event invariants.
class InvalidEvent : public Error {
public:
    InvalidEvent(std::string event_id, const std::string& what)
        : Error("event '" + event_id + "': " + what), event_id_(std::move(event_id))
    {
    }

    const std::string& event_id() const noexcept { return event_id_; }

private:
    std::string event_id_;
};

/// Lookup of an id that does not exist (unknown shot, unknown node).
class NotFound : public Error {
public:
    using Error::Error;
};

}  // namespace trailmine
