#pragma once

#include <stdexcept>
#include <string>

namespace wildlong {

// Error categories map one-to-one onto CLI exit codes (see tools/cli.hpp).

/// Bad or inconsistent input data: malformed records, dimension mismatches,
/// precondition violations on user-supplied values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structured text (LLM output, extraction blocks) that does not match the
/// expected layout. `offending_line()` holds the first line that could not be
/// interpreted, when there is one.
class ParseError : public InputError {
 public:
  explicit ParseError(const std::string& what, std::string offending_line = {})
      : InputError(what), offending_line_(std::move(offending_line)) {}
  const std::string& offending_line() const noexcept { return offending_line_; }

 private:
  std::string offending_line_;
};

/// A serialized artifact (graph, classifier, checkpoint) failed validation.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// Completion backend failure that is not recoverable by retrying, or a retry
/// budget that ran out.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, int attempts, int last_status)
      : std::runtime_error(what), attempts_(attempts), last_status_(last_status) {}
  int attempts() const noexcept { return attempts_; }
  /// HTTP status of the last attempt; 0 for transport-level failures.
  int last_status() const noexcept { return last_status_; }

 private:
  int attempts_;
  int last_status_;
};

}  // namespace wildlong
