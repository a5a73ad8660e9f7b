#pragma once

#include <stdexcept>

namespace facedit {

/// Invalid layout, window, run configuration or CLI argument combination.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or raster shape does not match the configured contract.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates an operation's precondition (too small, malformed stroke, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ImageIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, incomplete or version-mismatched checkpoint.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training stopped because a loss became non-finite.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stage prerequisites are missing (e.g. training `ld` before `align`).
class StageOrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facedit
