#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irp {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorKind { data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& what) : Error(ErrorKind::data, "shape mismatch: " + what) {}
};

class InvalidShape : public Error {
 public:
  explicit InvalidShape(const std::string& what) : Error(ErrorKind::data, "invalid shape: " + what) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorKind::data, "invalid argument: " + what) {}
};

/// All anchors collapse onto their mean.
class DegenerateSpace : public Error {
 public:
  explicit DegenerateSpace(const std::string& what) : Error(ErrorKind::data, "degenerate space: " + what) {}
};

class ZeroNormRow : public Error {
 public:
  explicit ZeroNormRow(std::size_t row)
      : Error(ErrorKind::data, "row " + std::to_string(row) + " has zero norm"), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class SvdFailure : public Error {
 public:
  explicit SvdFailure(const std::string& what) : Error(ErrorKind::numerical, "SVD failure: " + what) {}
};

class MissingSpace : public Error {
 public:
  explicit MissingSpace(const std::string& id) : Error(ErrorKind::data, "missing space '" + id + "'") {}
};

class InvalidLabels : public Error {
 public:
  explicit InvalidLabels(const std::string& what) : Error(ErrorKind::data, "invalid labels: " + what) {}
};

class ZeroVariance : public Error {
 public:
  ZeroVariance() : Error(ErrorKind::numerical, "input has zero variance") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error(ErrorKind::data, "length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorKind::data, "format error: " + what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::data, "io error: " + what) {}
};

/// Another error's message prefixed with where it happened, such as a file.
class ContextError : public Error {
 public:
  ContextError(const std::string& context, const Error& cause) : Error(cause.kind(), context + ": " + cause.what()) {}
};

}  // namespace irp
