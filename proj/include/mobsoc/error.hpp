#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mobsoc {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Usage = 2,
  Parse = 3,
  Integrity = 4,
  Numeric = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string name, const std::string& what)
      : std::runtime_error(what), kind_(kind), name_(std::move(name)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Short machine-readable error name, e.g. "ParseError".
  const std::string& name() const noexcept { return name_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string name_;
};

#define MOBSOC_DEFINE_ERROR(Type, Kind)                        \
  class Type : public Error {                                  \
   public:                                                     \
    explicit Type(const std::string& what)                     \
        : Error(ErrorKind::Kind, #Type, what) {}               \
  };

MOBSOC_DEFINE_ERROR(NoData, Numeric)
MOBSOC_DEFINE_ERROR(IntegrityError, Integrity)
MOBSOC_DEFINE_ERROR(InsufficientSpan, Numeric)
MOBSOC_DEFINE_ERROR(Unsupported, Usage)
MOBSOC_DEFINE_ERROR(UnknownNode, Integrity)
MOBSOC_DEFINE_ERROR(DegenerateInput, Numeric)
MOBSOC_DEFINE_ERROR(ModelEmpty, Numeric)
MOBSOC_DEFINE_ERROR(ConfigError, Usage)
MOBSOC_DEFINE_ERROR(SchemaError, Parse)

#undef MOBSOC_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Parse, "ParseError",
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mobsoc
