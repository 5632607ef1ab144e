#include "dialogsweep/errors.hpp"

#include <utility>

namespace dialogsweep {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Order: return "OrderError";
    case ErrorKind::MissingGold: return "MissingGold";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::RuleMismatch: return "RuleMismatch";
    case ErrorKind::CodebookIncomplete: return "CodebookIncomplete";
    case ErrorKind::InvalidBatchSize: return "InvalidBatchSize";
    case ErrorKind::RowCountMismatch: return "RowCountMismatch";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::EmptyCompletion: return "EmptyCompletion";
    case ErrorKind::Transport: return "TransportError";
    case ErrorKind::ModelRefusal: return "ModelRefusal";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::ConstantInput: return "ConstantInput";
    case ErrorKind::MeterUnavailable: return "MeterUnavailable";
    case ErrorKind::MeterBusy: return "MeterBusy";
    case ErrorKind::ZeroSessions: return "ZeroSessions";
    case ErrorKind::ObjectiveMismatch: return "ObjectiveMismatch";
    case ErrorKind::ResumeConflict: return "ResumeConflict";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

std::string_view to_string(TransportCause cause) {
  switch (cause) {
    case TransportCause::Connect: return "connect";
    case TransportCause::Timeout: return "timeout";
    case TransportCause::HttpStatus: return "http-status";
    case TransportCause::MalformedBody: return "malformed-body";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

SchemaError::SchemaError(std::string message, std::optional<std::size_t> line, std::string token)
    : Error(ErrorKind::Schema,
            (line ? "line " + std::to_string(*line) + ": " : std::string()) + message),
      line_(line),
      token_(std::move(token)) {}

CompletionError::CompletionError(ErrorKind kind, const std::string& message,
                                 std::size_t row_index, std::size_t found, std::size_t expected,
                                 std::string excerpt)
    : Error(kind, message),
      row_index_(row_index),
      found_(found),
      expected_(expected),
      excerpt_(std::move(excerpt)) {}

TransportError::TransportError(TransportCause cause, const std::string& message, int http_status)
    : Error(ErrorKind::Transport, std::string(to_string(cause)) + ": " + message),
      cause_(cause),
      http_status_(http_status) {}

}  // namespace dialogsweep
