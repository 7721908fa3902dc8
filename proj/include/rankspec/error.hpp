#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankspec {

// Bad input data: unreadable files, malformed lines, invalid counts or labels.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A numerical procedure could not produce a finite answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// SSE == 0: information criteria diverge to -inf.
class PerfectFitError : public NumericalError {
 public:
  PerfectFitError() : NumericalError("perfect fit (SSE = 0): information criterion is -inf") {}
};

}  // namespace rankspec
