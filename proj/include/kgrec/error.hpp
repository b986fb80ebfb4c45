#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgrec {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (TSV, JSONL, rule programs, queries).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, std::size_t column,
             const std::string& what)
      : Error(format(source, line, column, what)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            std::size_t column, const std::string& what) {
    std::string out = source.empty() ? std::string("input") : source;
    out += ":" + std::to_string(line);
    if (column > 0) out += ":" + std::to_string(column);
    out += ": " + what;
    return out;
  }

  std::size_t line_;
  std::size_t column_;
};

// An entity id that is not present in the graph.
class UnknownEntity : public Error {
 public:
  explicit UnknownEntity(const std::string& id, const std::string& context = {})
      : Error(context.empty() ? "unknown entity '" + id + "'"
                              : context + ": unknown entity '" + id + "'"),
        id_(id) {}

  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

// An entity has the wrong kind for the operation, e.g. likesMovie on a genre.
class KindMismatch : public Error {
 public:
  using Error::Error;
};

class DuplicateEntity : public Error {
 public:
  using Error::Error;
};

class UnknownPredicate : public Error {
 public:
  using Error::Error;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

// Invalid numeric or structural argument (alpha outside (0,1), k < 1, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace kgrec
