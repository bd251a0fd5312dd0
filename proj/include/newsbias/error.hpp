#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace newsbias {

// Bad user input: malformed rows, unknown labels, missing files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on numeric arguments was violated.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An upstream pipeline artifact is absent.
class MissingStageError : public std::runtime_error {
 public:
  MissingStageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace newsbias
