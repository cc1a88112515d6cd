#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gwat {

// Every failure any module can raise. The HTTP layer maps each kind to
// exactly one (status, error_code) pair, see api_error_for().
enum class ErrorKind {
  // lexicon
  MalformedLine,
  MissingFile,
  SynsetNotFound,
  InvalidIdFormat,
  EmptyQuery,
  InvalidLimit,
  // catalog
  MissingRoot,
  DuplicateFilename,
  UnknownCategoryPrefix,
  PictureNotFound,
  EmptyCatalog,
  StaleRef,
  ImageUnavailable,
  // store
  CorruptStore,
  IoFailure,
  UnknownPicture,
  UnknownSynset,
  AlreadyAttached,
  NotAttached,
  DanglingSynset,
  // exporter
  UnsupportedStatement,
  ForeignKeyViolation,
  DuplicateRow,
  UnterminatedString,
  UnknownFormat,
  // service
  BadRequest,
  ConfigError,
};

inline constexpr std::array kAllErrorKinds{
    ErrorKind::MalformedLine,        ErrorKind::MissingFile,
    ErrorKind::SynsetNotFound,       ErrorKind::InvalidIdFormat,
    ErrorKind::EmptyQuery,           ErrorKind::InvalidLimit,
    ErrorKind::MissingRoot,          ErrorKind::DuplicateFilename,
    ErrorKind::UnknownCategoryPrefix, ErrorKind::PictureNotFound,
    ErrorKind::EmptyCatalog,         ErrorKind::StaleRef,
    ErrorKind::ImageUnavailable,     ErrorKind::CorruptStore,
    ErrorKind::IoFailure,            ErrorKind::UnknownPicture,
    ErrorKind::UnknownSynset,        ErrorKind::AlreadyAttached,
    ErrorKind::NotAttached,          ErrorKind::DanglingSynset,
    ErrorKind::UnsupportedStatement, ErrorKind::ForeignKeyViolation,
    ErrorKind::DuplicateRow,         ErrorKind::UnterminatedString,
    ErrorKind::UnknownFormat,        ErrorKind::BadRequest,
    ErrorKind::ConfigError,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::SynsetNotFound: return "NotFound";
    case ErrorKind::InvalidIdFormat: return "InvalidIdFormat";
    case ErrorKind::EmptyQuery: return "EmptyQuery";
    case ErrorKind::InvalidLimit: return "InvalidLimit";
    case ErrorKind::MissingRoot: return "MissingRoot";
    case ErrorKind::DuplicateFilename: return "DuplicateFilename";
    case ErrorKind::UnknownCategoryPrefix: return "UnknownCategoryPrefix";
    case ErrorKind::PictureNotFound: return "NotFound";
    case ErrorKind::EmptyCatalog: return "EmptyCatalog";
    case ErrorKind::StaleRef: return "StaleRef";
    case ErrorKind::ImageUnavailable: return "ImageUnavailable";
    case ErrorKind::CorruptStore: return "CorruptStore";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::UnknownPicture: return "UnknownPicture";
    case ErrorKind::UnknownSynset: return "UnknownSynset";
    case ErrorKind::AlreadyAttached: return "AlreadyAttached";
    case ErrorKind::NotAttached: return "NotAttached";
    case ErrorKind::DanglingSynset: return "DanglingSynset";
    case ErrorKind::UnsupportedStatement: return "UnsupportedStatement";
    case ErrorKind::ForeignKeyViolation: return "ForeignKeyViolation";
    case ErrorKind::DuplicateRow: return "DuplicateRow";
    case ErrorKind::UnterminatedString: return "UnterminatedString";
    case ErrorKind::UnknownFormat: return "UnknownFormat";
    case ErrorKind::BadRequest: return "BadRequest";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

// Parse failures carry the 1-based line number of the offending input line.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line_number, const std::string& reason)
      : Error(ErrorKind::MalformedLine,
              "line " + std::to_string(line_number) + ": " + reason),
        line_number_(line_number) {}

  std::size_t line_number() const noexcept { return line_number_; }

 private:
  std::size_t line_number_;
};

}  // namespace gwat
