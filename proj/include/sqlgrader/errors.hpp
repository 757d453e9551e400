#pragma once

#include <stdexcept>
#include <string>

namespace sqlgrader {

// Shape or dimension mismatch at an op boundary.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad caller-supplied value (rate out of range, k > n, ...).
class ParameterError : public std::runtime_error {
public:
    explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data (CSV rows, lex failures, unknown enum strings).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training aborted (divergence, NaN loss).
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Checkpoint/file problems: version mismatch, checksum failure, unreadable path.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sqlgrader
