#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dialogsweep {

enum class ErrorKind {
  Io,
  Schema,
  Order,
  MissingGold,
  EmptyCorpus,
  EmptyBatch,
  RuleMismatch,
  CodebookIncomplete,
  InvalidBatchSize,
  RowCountMismatch,
  MalformedRow,
  EmptyCompletion,
  Transport,
  ModelRefusal,
  LengthMismatch,
  EmptyInput,
  DegenerateTable,
  EmptyReference,
  ConstantInput,
  MeterUnavailable,
  MeterBusy,
  ZeroSessions,
  ObjectiveMismatch,
  ResumeConflict,
  MissingColumn,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error the library throws. The kind is stable and is what
/// callers (and the CLI exit-code mapping) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Corpus/config schema violation. `line` is 1-based when known.
class SchemaError : public Error {
 public:
  SchemaError(std::string message, std::optional<std::size_t> line = std::nullopt,
              std::string token = {});

  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& token() const noexcept { return token_; }

 private:
  std::optional<std::size_t> line_;
  std::string token_;
};

/// Raised by completion parsing: RowCountMismatch, MalformedRow or EmptyCompletion.
class CompletionError : public Error {
 public:
  CompletionError(ErrorKind kind, const std::string& message, std::size_t row_index,
                  std::size_t found, std::size_t expected, std::string excerpt);

  std::size_t row_index() const noexcept { return row_index_; }
  std::size_t found() const noexcept { return found_; }
  std::size_t expected() const noexcept { return expected_; }
  const std::string& excerpt() const noexcept { return excerpt_; }

 private:
  std::size_t row_index_;
  std::size_t found_;
  std::size_t expected_;
  std::string excerpt_;
};

enum class TransportCause { Connect, Timeout, HttpStatus, MalformedBody };

std::string_view to_string(TransportCause cause);

class TransportError : public Error {
 public:
  TransportError(TransportCause cause, const std::string& message, int http_status = 0);

  TransportCause cause() const noexcept { return cause_; }
  int http_status() const noexcept { return http_status_; }

 private:
  TransportCause cause_;
  int http_status_;
};

}  // namespace dialogsweep
