#pragma once

#include <stdexcept>
#include <string>

namespace crimewave {

enum class ErrorKind {
  Input,     // malformed or insufficient data
  Config,    // invalid parameters or configuration
  Analysis,  // a numerical stage could not produce a result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace crimewave
