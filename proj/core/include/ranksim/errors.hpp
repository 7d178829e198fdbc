#pragma once

#include <stdexcept>
#include <string>

namespace ranksim {

/// Problem with the data being processed: malformed files, unknown words,
/// degenerate inputs to a statistic. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file or stream does not follow its declared format.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// A word or phrase could not be resolved against the vocabulary.
class OovError : public DataError {
 public:
  OovError(std::string phrase, const std::string& what)
      : DataError(what), phrase_(std::move(phrase)) {}

  const std::string& phrase() const noexcept { return phrase_; }

 private:
  std::string phrase_;
};

/// Caller-side contract violation (bad parameter, mismatched lengths).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ranksim
