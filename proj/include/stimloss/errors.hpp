#pragma once

#include <stdexcept>
#include <string>

namespace stimloss {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Unreadable or unparsable input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class SamplingInfeasible : public Error {
public:
    using Error::Error;
};

class DegenerateDistribution : public Error {
public:
    using Error::Error;
};

/// A channel's load voltage exceeds the supply it was handed.
class ComplianceViolation : public Error {
public:
    using Error::Error;
};

class InsufficientChannels : public Error {
public:
    InsufficientChannels(std::string subject_id, std::size_t available, std::size_t required)
        : Error("subject '" + subject_id + "': only " + std::to_string(available) +
                " channels within compliance, subset size is " + std::to_string(required)),
          subject_id_(std::move(subject_id)),
          available_(available),
          required_(required) {}

    const std::string& subject_id() const noexcept { return subject_id_; }
    std::size_t available() const noexcept { return available_; }
    std::size_t required() const noexcept { return required_; }

private:
    std::string subject_id_;
    std::size_t available_;
    std::size_t required_;
};

}  // namespace stimloss
