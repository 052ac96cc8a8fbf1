#pragma once

#include <stdexcept>
#include <string>

namespace rdcost {

/// Base of every error raised by the library. The CLI maps the category to
/// its exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Data, Spec, Range, Numeric, Shape };

  Error(Category category, const std::string& what) : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

/// Malformed, duplicated, gappy or incomplete input data.
class DataError : public Error {
 public:
  enum class Kind { Parse, Duplicate, Gap, Boundary, Completeness, Coverage, Io };

  DataError(Kind kind, const std::string& what) : Error(Category::Data, what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError(Kind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inconsistent configuration or feature/model specification.
class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error(Category::Spec, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(Category::Range, what) {}
};

/// Divergence, non-finite values or singular systems.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::Numeric, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(Category::Shape, what) {}
};

}  // namespace rdcost
