#pragma once

#include <stdexcept>
#include <string>

namespace ahcr {

/// Dimension or layout violation in a tensor / layer operation.
class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller passed an invalid value (label out of range, empty input, ...).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed file content: CSV layout, container magic, checksum mismatch.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced a non-finite loss.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, long epoch, long batch)
      : std::runtime_error(what), epoch(epoch), batch(batch) {}
  long epoch;
  long batch;
};

}  // namespace ahcr
