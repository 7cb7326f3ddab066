#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace hadola {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class NoSuchAnswer : public Error {
 public:
  explicit NoSuchAnswer(const std::string& answer)
      : Error("no annotator gave answer '" + answer + "'"), answer_(answer) {}
  const std::string& answer() const noexcept { return answer_; }

 private:
  std::string answer_;
};

class SupportMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidTemperature : public Error {
 public:
  explicit InvalidTemperature(double t)
      : Error("temperature must be positive, got " + std::to_string(t)) {}
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class VocabError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SeedStratumError : public Error {
 public:
  using Error::Error;
};

// Raised when training produces a non-finite loss. `round` is filled in by the
// pipeline when the failure happens inside a round.
class DivergedError : public Error {
 public:
  DivergedError(std::size_t epoch, std::optional<std::size_t> round = std::nullopt)
      : Error(describe(epoch, round)), epoch_(epoch), round_(round) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::optional<std::size_t> round() const noexcept { return round_; }

 private:
  static std::string describe(std::size_t epoch, std::optional<std::size_t> round) {
    std::string msg = "training diverged (non-finite loss) at epoch " + std::to_string(epoch);
    if (round) msg += " of round " + std::to_string(*round);
    return msg;
  }

  std::size_t epoch_;
  std::optional<std::size_t> round_;
};

}  // namespace hadola
