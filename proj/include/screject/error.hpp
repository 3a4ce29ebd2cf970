#pragma once

#include <stdexcept>
#include <string>

namespace screject {

/// Thrown when an operation receives values outside its domain
/// (non-finite logits, invalid distributions, bad configuration).
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown on malformed logit-record files; carries the offending line.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, long line)
        : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// Thrown when training produces a non-finite loss.
class TrainingDiverged : public std::runtime_error {
public:
    explicit TrainingDiverged(int epoch)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch)),
          epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

}  // namespace screject
