#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dipfill {

// Base for all library errors. Subclasses map to CLI exit codes:
// parse/dimension/config/degenerate -> 2, numeric -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or spatial-extent mismatch between operands.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Invalid configuration value or unsatisfiable request.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed input file; carries the byte offset of the failure.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t byte_offset)
        : Error(msg + " (byte offset " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}
    std::size_t byte_offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Non-finite value produced during optimization; carries the iteration index.
class NumericError : public Error {
public:
    NumericError(const std::string& msg, long iteration)
        : Error(msg + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

// Degenerate mask or evaluation region (nothing to average over).
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& msg) : Error(msg) {}
};

// API contract violation (e.g. backward on a non-scalar).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// File format cannot represent the data (e.g. band count).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(msg) {}
};

}  // namespace dipfill
