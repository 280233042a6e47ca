#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace probfuse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed annotation or detection text. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Out-of-range or inconsistent parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Operation undefined on a mask with no set cell.
class EmptyMaskError : public Error {
 public:
  EmptyMaskError() : Error("mask has no set cell") {}
};

/// Rasters whose dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent caller input (duplicate classes, unknown names, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Image file decodes but is not in a layout we accept.
class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

/// Corrupt or truncated binary file. Carries the byte offset of the problem.
class FormatError : public Error {
 public:
  FormatError(std::uint64_t offset, const std::string& what)
      : Error("offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace probfuse
