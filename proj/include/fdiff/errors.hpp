#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fdiff {

// Bad scalar/list arguments (even kernel size, empty weights, overlapping masks...).
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Tensor shapes that do not fit the operation.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ScheduleError : std::domain_error {
    using std::domain_error::domain_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DecodeError : IoError {
    using IoError::IoError;
};

// Everything that goes wrong while talking to a predictor or scorer backend.
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConnectionError : BackendError {
    using BackendError::BackendError;
};

struct ProtocolError : BackendError {
    using BackendError::BackendError;
};

struct ServerError : BackendError {
    ServerError(int status, std::string body)
        : BackendError("server returned HTTP " + std::to_string(status) + ": " + body),
          status(status), body(std::move(body)) {}
    int status;
    std::string body;
};

// Collects every problem found while validating a run configuration.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

}  // namespace fdiff
