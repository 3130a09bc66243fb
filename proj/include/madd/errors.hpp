#pragma once

#include <stdexcept>
#include <string>

namespace madd {

/// Base class of every error raised by the library. Each subclass carries the
/// process exit code the command-line tool maps it to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual int exit_code() const noexcept { return 1; }
};

/// Malformed process description (parse failure, schema violation, row mass).
class SpecError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 2; }
};

/// An operation was called outside its domain (reducible chain, centered
/// process, point off the boundary, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 3; }
};

/// A numerical procedure failed to converge or lost its accuracy guarantee.
class NumericError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 4; }
};

/// A configured resource cap (convolution power, grid size, ...) was exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] int exit_code() const noexcept override { return 5; }
};

}  // namespace madd
