#ifndef GRIDNAV_ERROR_HPP
#define GRIDNAV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gridnav {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct OutOfBoundsError : Error {
    using Error::Error;
};

struct NoPathError : Error {
    using Error::Error;
};

struct DegenerateGeometryError : Error {
    using Error::Error;
};

struct ReplayMismatchError : Error {
    using Error::Error;
};

struct SchemaError : Error {
    SchemaError(const std::string& msg, long line_number)
        : Error(msg + " (line " + std::to_string(line_number) + ")"), line(line_number) {}
    long line;
};

struct MissingTokenCountsError : Error {
    using Error::Error;
};

struct PolicyFaultError : Error {
    using Error::Error;
};

struct GenerationExhaustedError : Error {
    using Error::Error;
};

struct InsufficientCandidatesError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace gridnav

#endif
