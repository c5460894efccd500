#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tweetlens {

// Bad or unusable input data / parameters. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedLine : public InputError {
 public:
  MalformedLine(std::size_t line_no, const std::string& what)
      : InputError("line " + std::to_string(line_no) + ": malformed record: " + what), line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class MissingField : public InputError {
 public:
  MissingField(std::size_t line_no, std::string field)
      : InputError("line " + std::to_string(line_no) + ": missing field \"" + field + "\""),
        line_no_(line_no),
        field_(std::move(field)) {}
  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_no_;
  std::string field_;
};

// Zero-shot backend failures. CLI exit code 3.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BackendUnavailable : public BackendError {
 public:
  explicit BackendUnavailable(const std::string& what)
      : BackendError("classifier backend unavailable: " + what +
                     " (check that the service is running and reachable, then rerun the stage)") {}
};

class BackendContractViolation : public BackendError {
 public:
  explicit BackendContractViolation(const std::string& what)
      : BackendError("classifier backend contract violation: " + what) {}
};

}  // namespace tweetlens

namespace tweetlens {

class InvalidWindow : public InputError {
 public:
  InvalidWindow() : InputError("time window start is after its end") {}
};

}  // namespace tweetlens

namespace tweetlens {

class EmptyLexicon : public InputError {
 public:
  explicit EmptyLexicon(const std::string& label)
      : InputError("keyword lexicon has no keywords for label \"" + label + "\""), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

}  // namespace tweetlens

namespace tweetlens {

// Numerical breakdown inside an optimizer. CLI exit code 1.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyTrainingSet : public InputError {
 public:
  EmptyTrainingSet() : InputError("no documents survive the rare-word filter; nothing to train on") {}
};

class NonFiniteLoss : public NumericalError {
 public:
  explicit NonFiniteLoss(int epoch)
      : NumericalError("training loss became non-finite in epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace tweetlens

namespace tweetlens {

class PerplexityTooHigh : public InputError {
 public:
  PerplexityTooHigh(double perplexity, std::size_t n)
      : InputError("perplexity " + std::to_string(perplexity) + " is too high for " + std::to_string(n) +
                   " points; it must be below (n - 1) / 3") {}
};

class TooFewPoints : public InputError {
 public:
  TooFewPoints(std::size_t n, std::size_t needed)
      : InputError("need at least " + std::to_string(needed) + " points, got " + std::to_string(n)) {}
};

}  // namespace tweetlens

namespace tweetlens {

class KTooLarge : public InputError {
 public:
  KTooLarge(std::size_t k, std::size_t n)
      : InputError("k = " + std::to_string(k) + " exceeds the number of users (" + std::to_string(n) + ")") {}
};

}  // namespace tweetlens

namespace tweetlens {

class NoQualifyingTweets : public InputError {
 public:
  explicit NoQualifyingTweets(const std::string& label)
      : InputError("no first-person tweets carry the label \"" + label + "\""), label_(label) {}
  const std::string& label() const noexcept { return label_; }

 private:
  std::string label_;
};

}  // namespace tweetlens

namespace tweetlens {

class TooFewUsers : public InputError {
 public:
  explicit TooFewUsers(std::size_t n)
      : InputError("the narrative pipeline needs at least 4 users with vectors, got " + std::to_string(n)) {}
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

class WorkspaceLocked : public InputError {
 public:
  explicit WorkspaceLocked(const std::string& lock_path)
      : InputError("workspace is in use by another process (lock file " + lock_path +
                   "); wait for it to finish or delete the lock if that process is gone") {}
};

}  // namespace tweetlens
